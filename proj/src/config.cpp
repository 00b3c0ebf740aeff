#include "qpol/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace qpol::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

long parse_long(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": expected an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("[" + section + "] " + key + ": expected on/off, got '" + v + "'");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run", {"seeds", "episodes", "output", "timing", "parallelism", "eval_episodes"}},
    {"env",
     {"kind", "env_seed", "p", "g", "s", "slip", "episode_len", "chain_len", "channels",
      "gravity", "force_mag", "tau", "horizon", "goal_bonus", "height_coeff", "force", "dt"}},
    {"policy",
     {"kind", "n_qubits", "d_enc", "entangler", "entangler_trainable", "observables",
      "partition", "beta_final", "anneal_episodes", "widths"}},
    {"train",
     {"batch", "gamma", "horizon", "baseline", "ridge", "lr_phi", "lr_w", "lr_lambda", "lr_mlp",
      "shots", "freeze_lambda", "freeze_w"}},
};

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile file;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            file.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (file.sections[section].count(key))
            throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
        file.sections[section][key] = value;
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::string ConfigFile::serialize() const {
    std::string out;
    for (const auto& [section, kv] : sections) {
        out += "[" + section + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    }
    return out;
}

void ConfigFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << serialize();
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

ExperimentConfig ExperimentConfig::from(const ConfigFile& file) {
    for (const auto& [section, kv] : file.sections) {
        const auto schema = kSchema.find(section);
        if (schema == kSchema.end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [k, v] : kv)
            if (!schema->second.count(k))
                throw ConfigError("unknown key '" + k + "' in [" + section + "]");
    }

    ExperimentConfig c;
    if (file.has("run", "seeds")) {
        c.seeds.clear();
        for (const auto& t : tokens(file.get("run", "seeds", "")))
            c.seeds.push_back(static_cast<std::uint64_t>(parse_long("run", "seeds", t)));
    }
    c.episodes = parse_long("run", "episodes", file.get("run", "episodes", "1000"));
    c.output = file.get("run", "output", "run");
    c.timing = parse_bool("run", "timing", file.get("run", "timing", "off"));
    c.parallelism =
        static_cast<int>(parse_long("run", "parallelism", file.get("run", "parallelism", "1")));
    c.eval_episodes = static_cast<int>(
        parse_long("run", "eval_episodes", file.get("run", "eval_episodes", "100")));
    if (c.episodes < 1) throw ConfigError("[run] episodes must be >= 1");
    if (c.parallelism < 1) throw ConfigError("[run] parallelism must be >= 1");

    const std::string kind = file.get("env", "kind", "cartpole");
    if (kind == "cartpole") c.env_kind = EnvKind::CartPole;
    else if (kind == "mountaincar") c.env_kind = EnvKind::MountainCar;
    else if (kind == "acrobot") c.env_kind = EnvKind::Acrobot;
    else if (kind == "cognitive_radio") c.env_kind = EnvKind::CognitiveRadio;
    else if (kind == "pqc_sl") c.env_kind = EnvKind::PqcSl;
    else if (kind == "pqc_cliffwalk") c.env_kind = EnvKind::PqcCliffwalk;
    else if (kind == "dlp_sl") c.env_kind = EnvKind::DlpSl;
    else if (kind == "dlp_cliffwalk") c.env_kind = EnvKind::DlpCliffwalk;
    else if (kind == "dlp_chain") c.env_kind = EnvKind::DlpChain;
    else throw ConfigError("[env] unknown kind '" + kind + "'");

    c.env_seed = static_cast<std::uint64_t>(
        parse_long("env", "env_seed", file.get("env", "env_seed", "0")));
    c.dlp_p = static_cast<dlp::u64>(parse_long("env", "p", file.get("env", "p", "101")));
    c.dlp_g = static_cast<dlp::u64>(parse_long("env", "g", file.get("env", "g", "2")));
    c.dlp_s = static_cast<dlp::u64>(parse_long("env", "s", file.get("env", "s", "0")));
    c.slip = parse_double("env", "slip", file.get("env", "slip", "0"));
    c.episode_len =
        static_cast<int>(parse_long("env", "episode_len", file.get("env", "episode_len", "1")));
    c.chain_len =
        static_cast<int>(parse_long("env", "chain_len", file.get("env", "chain_len", "10")));
    c.channels =
        static_cast<int>(parse_long("env", "channels", file.get("env", "channels", "4")));
    if (file.has("env", "gravity")) {
        const double g = parse_double("env", "gravity", file.get("env", "gravity", ""));
        c.cartpole.gravity = g;
        c.mountaincar.gravity = g;
        c.acrobot.gravity = g;
    }
    if (file.has("env", "force_mag"))
        c.cartpole.force_mag = parse_double("env", "force_mag", file.get("env", "force_mag", ""));
    if (file.has("env", "force"))
        c.mountaincar.force = parse_double("env", "force", file.get("env", "force", ""));
    if (file.has("env", "tau"))
        c.cartpole.tau = parse_double("env", "tau", file.get("env", "tau", ""));
    if (file.has("env", "dt"))
        c.acrobot.dt = parse_double("env", "dt", file.get("env", "dt", ""));
    if (file.has("env", "horizon")) {
        const int h = static_cast<int>(parse_long("env", "horizon", file.get("env", "horizon", "")));
        c.cartpole.horizon = h;
        c.mountaincar.horizon = h;
        c.acrobot.horizon = h;
    }
    if (file.has("env", "goal_bonus"))
        c.mountaincar.goal_bonus =
            parse_double("env", "goal_bonus", file.get("env", "goal_bonus", ""));
    if (file.has("env", "height_coeff"))
        c.mountaincar.height_coeff =
            parse_double("env", "height_coeff", file.get("env", "height_coeff", ""));

    const std::string pol = file.get("policy", "kind", "softmax");
    if (pol == "softmax") c.policy = PolicyChoice::Softmax;
    else if (pol == "born") c.policy = PolicyChoice::Born;
    else if (pol == "mlp") c.policy = PolicyChoice::Mlp;
    else throw ConfigError("[policy] unknown kind '" + pol + "'");

    c.n_qubits =
        static_cast<int>(parse_long("policy", "n_qubits", file.get("policy", "n_qubits", "4")));
    c.d_enc = static_cast<int>(parse_long("policy", "d_enc", file.get("policy", "d_enc", "5")));
    const std::string ent = file.get("policy", "entangler", "one_to_one");
    if (ent == "one_to_one") c.entangler = pqc::Entangler::OneToOne;
    else if (ent == "circular") c.entangler = pqc::Entangler::Circular;
    else if (ent == "all_to_all") c.entangler = pqc::Entangler::AllToAll;
    else throw ConfigError("[policy] unknown entangler '" + ent + "'");
    c.entangler_trainable = parse_bool("policy", "entangler_trainable",
                                       file.get("policy", "entangler_trainable", "off"));
    c.observables = file.get("policy", "observables", "");
    c.partition = file.get("policy", "partition", "ranges");
    c.beta_final =
        parse_double("policy", "beta_final", file.get("policy", "beta_final", "1"));
    c.anneal_episodes = parse_long("policy", "anneal_episodes",
                                   file.get("policy", "anneal_episodes", "0"));
    if (file.has("policy", "widths")) {
        c.mlp_hidden.clear();
        for (const auto& t : tokens(file.get("policy", "widths", "")))
            c.mlp_hidden.push_back(static_cast<int>(parse_long("policy", "widths", t)));
    }

    c.batch_size = static_cast<int>(parse_long("train", "batch", file.get("train", "batch", "10")));
    c.gamma = parse_double("train", "gamma", file.get("train", "gamma", "1"));
    c.horizon = static_cast<int>(parse_long("train", "horizon", file.get("train", "horizon", "0")));
    c.use_baseline = parse_bool("train", "baseline", file.get("train", "baseline", "on"));
    c.ridge = parse_double("train", "ridge", file.get("train", "ridge", "1e-05"));
    c.lr_phi = parse_double("train", "lr_phi", file.get("train", "lr_phi", "0.01"));
    c.lr_w = parse_double("train", "lr_w", file.get("train", "lr_w", "0.1"));
    c.lr_lambda = parse_double("train", "lr_lambda", file.get("train", "lr_lambda", "0.1"));
    c.lr_mlp = parse_double("train", "lr_mlp", file.get("train", "lr_mlp", "0.01"));
    c.shots = static_cast<int>(parse_long("train", "shots", file.get("train", "shots", "0")));
    c.freeze_lambda =
        parse_bool("train", "freeze_lambda", file.get("train", "freeze_lambda", "off"));
    c.freeze_w = parse_bool("train", "freeze_w", file.get("train", "freeze_w", "off"));
    if (c.batch_size < 1) throw ConfigError("[train] batch must be >= 1");
    if (c.gamma < 0.0 || c.gamma > 1.0) throw ConfigError("[train] gamma must be in [0,1]");
    if (c.beta_final <= 0.0) throw ConfigError("[policy] beta_final must be > 0");
    return c;
}

ConfigFile ExperimentConfig::to_file() const {
    ConfigFile f;
    std::string seed_list;
    for (std::size_t i = 0; i < seeds.size(); ++i)
        seed_list += (i ? " " : "") + std::to_string(seeds[i]);
    auto& run = f.sections["run"];
    run["seeds"] = seed_list;
    run["episodes"] = std::to_string(episodes);
    run["output"] = output;
    run["timing"] = timing ? "on" : "off";
    run["parallelism"] = std::to_string(parallelism);
    run["eval_episodes"] = std::to_string(eval_episodes);

    auto& env = f.sections["env"];
    switch (env_kind) {
        case EnvKind::CartPole: env["kind"] = "cartpole"; break;
        case EnvKind::MountainCar: env["kind"] = "mountaincar"; break;
        case EnvKind::Acrobot: env["kind"] = "acrobot"; break;
        case EnvKind::CognitiveRadio: env["kind"] = "cognitive_radio"; break;
        case EnvKind::PqcSl: env["kind"] = "pqc_sl"; break;
        case EnvKind::PqcCliffwalk: env["kind"] = "pqc_cliffwalk"; break;
        case EnvKind::DlpSl: env["kind"] = "dlp_sl"; break;
        case EnvKind::DlpCliffwalk: env["kind"] = "dlp_cliffwalk"; break;
        case EnvKind::DlpChain: env["kind"] = "dlp_chain"; break;
    }
    env["env_seed"] = std::to_string(env_seed);
    env["p"] = std::to_string(dlp_p);
    env["g"] = std::to_string(dlp_g);
    env["s"] = std::to_string(dlp_s);
    env["slip"] = fmt(slip);
    env["episode_len"] = std::to_string(episode_len);
    env["chain_len"] = std::to_string(chain_len);
    env["channels"] = std::to_string(channels);

    auto& pol = f.sections["policy"];
    pol["kind"] = policy == PolicyChoice::Softmax ? "softmax"
                  : policy == PolicyChoice::Born  ? "born"
                                                  : "mlp";
    pol["n_qubits"] = std::to_string(n_qubits);
    pol["d_enc"] = std::to_string(d_enc);
    pol["entangler"] = entangler == pqc::Entangler::OneToOne   ? "one_to_one"
                       : entangler == pqc::Entangler::Circular ? "circular"
                                                               : "all_to_all";
    pol["entangler_trainable"] = entangler_trainable ? "on" : "off";
    if (!observables.empty()) pol["observables"] = observables;
    pol["partition"] = partition;
    pol["beta_final"] = fmt(beta_final);
    pol["anneal_episodes"] = std::to_string(anneal_episodes);
    std::string widths;
    for (std::size_t i = 0; i < mlp_hidden.size(); ++i)
        widths += (i ? " " : "") + std::to_string(mlp_hidden[i]);
    pol["widths"] = widths;

    auto& tr = f.sections["train"];
    tr["batch"] = std::to_string(batch_size);
    tr["gamma"] = fmt(gamma);
    tr["horizon"] = std::to_string(horizon);
    tr["baseline"] = use_baseline ? "on" : "off";
    tr["ridge"] = fmt(ridge);
    tr["lr_phi"] = fmt(lr_phi);
    tr["lr_w"] = fmt(lr_w);
    tr["lr_lambda"] = fmt(lr_lambda);
    tr["lr_mlp"] = fmt(lr_mlp);
    tr["shots"] = std::to_string(shots);
    tr["freeze_lambda"] = freeze_lambda ? "on" : "off";
    tr["freeze_w"] = freeze_w ? "on" : "off";
    return f;
}

std::vector<qsim::ObservableSpec> parse_observables(const std::string& text, int n_qubits) {
    if (trim(text).empty()) throw ConfigError("observables must be non-empty");
    std::vector<qsim::ObservableSpec> out;
    for (const std::string& action_spec : split(text, '|')) {
        qsim::ObservableSpec spec;
        for (std::string term_text : split(action_spec, '+')) {
            term_text = trim(term_text);
            if (term_text.empty()) throw ConfigError("empty observable term");
            double weight = 1.0;
            if (term_text.front() == '-') {
                weight = -1.0;
                term_text = trim(term_text.substr(1));
            }
            std::string paulis(n_qubits, 'I');
            bool have_pauli = false, have_proj = false;
            std::uint64_t lo = 0, hi = 0;
            for (std::string factor : split(term_text, '*')) {
                factor = trim(factor);
                if (factor.empty()) throw ConfigError("empty factor in observable term");
                const char c = factor.front();
                if (c == 'Z' || c == 'X' || c == 'Y') {
                    const int q = static_cast<int>(parse_long("policy", "observables",
                                                              factor.substr(1)));
                    if (q < 0 || q >= n_qubits)
                        throw ConfigError("observable qubit index out of range: " + factor);
                    if (paulis[q] != 'I')
                        throw ConfigError("duplicate Pauli on qubit " + std::to_string(q));
                    paulis[q] = c;
                    have_pauli = true;
                } else if (c == 'P') {
                    const std::size_t dots = factor.find("..");
                    if (dots == std::string::npos)
                        throw ConfigError("projector must be P<lo>..<hi>: " + factor);
                    lo = static_cast<std::uint64_t>(
                        parse_long("policy", "observables", factor.substr(1, dots - 1)));
                    hi = static_cast<std::uint64_t>(
                        parse_long("policy", "observables", factor.substr(dots + 2)));
                    if (hi < lo || hi >= (1ULL << n_qubits))
                        throw ConfigError("projector range out of bounds: " + factor);
                    have_proj = true;
                } else {
                    weight *= parse_double("policy", "observables", factor);
                }
            }
            if (have_pauli && have_proj)
                throw ConfigError("a term is either a Pauli string or a projector, not both");
            if (have_proj)
                spec.terms.push_back(qsim::ObsTerm::projector_range(lo, hi, weight));
            else if (have_pauli)
                spec.terms.push_back(qsim::ObsTerm::pauli_string(paulis, weight));
            else
                throw ConfigError("observable term has no operator: " + term_text);
        }
        out.push_back(std::move(spec));
    }
    return out;
}

qsim::ActionPartition parse_partition(const std::string& text, int n_qubits, int n_actions) {
    const std::string t = trim(text);
    if (t == "ranges") return qsim::ActionPartition::by_index_ranges(n_qubits, n_actions);
    if (t == "parity") {
        if (n_actions != 2) throw ConfigError("parity partition is two-action");
        return qsim::ActionPartition::by_parity(n_qubits);
    }
    if (t.rfind("qubit", 0) == 0) {
        if (n_actions != 2) throw ConfigError("qubit partition is two-action");
        const int q = static_cast<int>(parse_long("policy", "partition", t.substr(5)));
        return qsim::ActionPartition::by_qubit(n_qubits, q);
    }
    throw ConfigError("unknown partition '" + t + "'");
}

}  // namespace qpol::cli
