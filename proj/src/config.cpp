#include "gmwb/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gmwb {

using nlohmann::json;

std::string to_string(Measure m) { return m == Measure::Q ? "Q" : "P"; }
std::string to_string(MemoryMode m) { return m == MemoryMode::SinglePass ? "single-pass" : "ancestry-replay"; }
std::string to_string(AbsorptionTiming t) { return t == AbsorptionTiming::Grid ? "grid" : "interpolated"; }
std::string to_string(FeeMode m) { return m == FeeMode::Fair ? "fair" : "underpriced"; }
std::string to_string(JumpFeeTerm t) { return t == JumpFeeTerm::Unscaled ? "unscaled" : "scaled"; }

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double num(const json& obj, const std::string& where, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

template <class Int>
Int integer(const json& obj, const std::string& where, const std::string& key, Int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) return v.get<Int>();
    throw ConfigError(where + "." + key + " must be a nonnegative integer");
}

bool boolean(const json& obj, const std::string& where, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
    return v.get<bool>();
}

std::string text(const json& obj, const std::string& where, const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& where, const std::string& key,
                            const std::vector<double>& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

template <class Enum>
Enum choice(const std::string& value, const std::string& where,
            std::initializer_list<std::pair<const char*, Enum>> options) {
    std::string names;
    for (const auto& [name, e] : options) {
        if (value == name) return e;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(where + " must be one of: " + names);
}

json section(const json& doc, const std::string& key) { return doc.contains(key) ? doc.at(key) : json::object(); }

}  // namespace

RunConfig config_from_json(const json& doc) {
    check_keys(doc, "config", {"market", "premia", "fee", "contract", "sim", "commands"});
    RunConfig rc;
    SimConfig& s = rc.sim;

    const json market = section(doc, "market");
    check_keys(market, "market", {"nu", "rho_rev", "kappa", "v0", "rho", "lambda", "delta", "chi", "r"});
    MarketParamsQ& mk = s.market;
    mk.nu = num(market, "market", "nu", mk.nu);
    mk.rho_rev = num(market, "market", "rho_rev", mk.rho_rev);
    mk.kappa = num(market, "market", "kappa", mk.kappa);
    mk.v0 = num(market, "market", "v0", mk.v0);
    mk.rho = num(market, "market", "rho", mk.rho);
    mk.lambda = num(market, "market", "lambda", mk.lambda);
    mk.delta = num(market, "market", "delta", mk.delta);
    mk.chi = num(market, "market", "chi", mk.chi);
    mk.r = num(market, "market", "r", mk.r);

    const json premia = section(doc, "premia");
    check_keys(premia, "premia", {"eta_s", "eta_v", "eta_j"});
    s.premia.eta_s = num(premia, "premia", "eta_s", s.premia.eta_s);
    s.premia.eta_v = num(premia, "premia", "eta_v", s.premia.eta_v);
    s.premia.eta_j = num(premia, "premia", "eta_j", s.premia.eta_j);

    const json fee = section(doc, "fee");
    check_keys(fee, "fee", {"q", "c_bar", "m", "jump_term"});
    s.fee.q = num(fee, "fee", "q", s.fee.q);
    s.fee.c_bar = num(fee, "fee", "c_bar", s.fee.c_bar);
    s.fee.m = num(fee, "fee", "m", s.fee.m);
    s.fee.jump_term = choice<JumpFeeTerm>(text(fee, "fee", "jump_term", "unscaled"), "fee.jump_term",
                                          {{"unscaled", JumpFeeTerm::Unscaled},
                                           {"scaled", JumpFeeTerm::ScaledByMultiplier}});

    const json contract = section(doc, "contract");
    check_keys(contract, "contract", {"f0", "rate", "withdrawals", "term"});
    const double f0 = num(contract, "contract", "f0", 100.0);
    if (contract.contains("rate") && contract.contains("withdrawals")) {
        throw ConfigError("contract takes either rate or withdrawals, not both");
    }
    if (contract.contains("term") && (contract.contains("rate") || contract.contains("withdrawals"))) {
        throw ConfigError("contract.term applies only to contracts without withdrawals");
    }
    if (contract.contains("term")) {
        s.contract = ContractSpec::accumulation(f0, num(contract, "contract", "term", 0.0));
    } else if (contract.contains("withdrawals")) {
        const json& list = contract.at("withdrawals");
        if (!list.is_array()) throw ConfigError("contract.withdrawals must be an array");
        s.contract = ContractSpec{};
        s.contract.f0 = f0;
        for (const auto& seg : list) {
            check_keys(seg, "contract.withdrawals[]", {"from_year", "to_year", "rate"});
            for (const char* k : {"from_year", "to_year", "rate"}) {
                if (!seg.contains(k)) throw ConfigError(std::string("contract.withdrawals[] needs ") + k);
            }
            s.contract.withdrawals.push_back({num(seg, "withdrawals", "from_year", 0.0),
                                              num(seg, "withdrawals", "to_year", 0.0),
                                              num(seg, "withdrawals", "rate", 0.0)});
        }
    } else {
        s.contract = ContractSpec::constant_rate(f0, num(contract, "contract", "rate", 7.0));
    }

    const json sim = section(doc, "sim");
    check_keys(sim, "sim", {"n_paths", "h", "seed", "epsilon", "q1", "q2", "branching", "sub_steps", "bridge_levels", "memory",
                            "pooled", "threads", "batches", "absorption", "measure"});
    s.n_paths = integer<std::size_t>(sim, "sim", "n_paths", s.n_paths);
    s.h = num(sim, "sim", "h", s.h);
    s.seed = integer<std::uint64_t>(sim, "sim", "seed", s.seed);
    s.epsilon = num(sim, "sim", "epsilon", s.epsilon);
    s.branch.q1 = num(sim, "sim", "q1", s.branch.q1);
    s.branch.q2 = num(sim, "sim", "q2", s.branch.q2);
    s.branching = boolean(sim, "sim", "branching", s.branching);
    s.sub_steps = integer<int>(sim, "sim", "sub_steps", s.sub_steps);
    s.bridge_levels = integer<int>(sim, "sim", "bridge_levels", s.bridge_levels);
    s.memory = choice<MemoryMode>(text(sim, "sim", "memory", "single-pass"), "sim.memory",
                                  {{"single-pass", MemoryMode::SinglePass},
                                   {"ancestry-replay", MemoryMode::AncestryReplay}});
    s.pooled = boolean(sim, "sim", "pooled", s.pooled);
    s.threads = integer<int>(sim, "sim", "threads", s.threads);
    s.batches = integer<std::size_t>(sim, "sim", "batches", s.batches);
    s.absorption = choice<AbsorptionTiming>(text(sim, "sim", "absorption", "grid"), "sim.absorption",
                                            {{"grid", AbsorptionTiming::Grid},
                                             {"interpolated", AbsorptionTiming::Interpolated}});
    s.measure = choice<Measure>(text(sim, "sim", "measure", "Q"), "sim.measure",
                                {{"Q", Measure::Q}, {"P", Measure::P}});

    const json cmds = section(doc, "commands");
    check_keys(cmds, "commands", {"fair_fee", "sensitivity", "fee_curve", "loss_dist", "validate"});
    CommandSettings& c = rc.commands;
    const json ff = section(cmds, "fair_fee");
    check_keys(ff, "commands.fair_fee", {"m_list", "lo", "hi", "tol", "stop_within_error", "method", "max_iterations"});
    c.m_list = numbers(ff, "commands.fair_fee", "m_list", c.m_list);
    c.fair.lo = num(ff, "commands.fair_fee", "lo", c.fair.lo);
    c.fair.hi = num(ff, "commands.fair_fee", "hi", c.fair.hi);
    c.fair.tol = num(ff, "commands.fair_fee", "tol", c.fair.tol);
    c.fair.stop_within_error = boolean(ff, "commands.fair_fee", "stop_within_error", c.fair.stop_within_error);
    c.fair.method = choice<RootMethod>(text(ff, "commands.fair_fee", "method", "bisection"), "commands.fair_fee.method",
                                       {{"bisection", RootMethod::Bisection}, {"illinois", RootMethod::Illinois}});
    c.fair.max_iterations = integer<int>(ff, "commands.fair_fee", "max_iterations", c.fair.max_iterations);

    const json sw = section(cmds, "sensitivity");
    check_keys(sw, "commands.sensitivity", {"v0_grid", "m_grid", "c_bar", "fee_mode", "measure"});
    c.v0_grid = numbers(sw, "commands.sensitivity", "v0_grid", c.v0_grid);
    if (sw.contains("m_grid")) c.m_list = numbers(sw, "commands.sensitivity", "m_grid", c.m_list);
    c.sweep_c_bar = numbers(sw, "commands.sensitivity", "c_bar", c.sweep_c_bar);
    c.fee_mode = choice<FeeMode>(text(sw, "commands.sensitivity", "fee_mode", "fair"), "commands.sensitivity.fee_mode",
                                 {{"fair", FeeMode::Fair}, {"underpriced", FeeMode::Underpriced}});
    c.sweep_measure = choice<Measure>(text(sw, "commands.sensitivity", "measure", "Q"),
                                      "commands.sensitivity.measure", {{"Q", Measure::Q}, {"P", Measure::P}});

    const json fc = section(cmds, "fee_curve");
    check_keys(fc, "commands.fee_curve", {"c_bar_grid"});
    c.c_bar_grid = numbers(fc, "commands.fee_curve", "c_bar_grid", c.c_bar_grid);

    const json ld = section(cmds, "loss_dist");
    check_keys(ld, "commands.loss_dist", {"zeta", "write_samples"});
    c.zeta = num(ld, "commands.loss_dist", "zeta", c.zeta);
    c.write_samples = boolean(ld, "commands.loss_dist", "write_samples", c.write_samples);

    const json va = section(cmds, "validate");
    check_keys(va, "commands.validate", {"euler_h", "n_paths"});
    c.euler_h = num(va, "commands.validate", "euler_h", c.euler_h);
    c.validate_paths = integer<std::size_t>(va, "commands.validate", "n_paths", c.validate_paths);

    s.validate();
    return rc;
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is the 1-based offset of the offending character
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream os;
        os << "JSON parse error at line " << line << ", column " << column << ": " << e.what();
        throw ConfigParseError(os.str(), line, column);
    }
    return config_from_json(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

json to_json(const RunConfig& rc) {
    const SimConfig& s = rc.sim;
    json withdrawals = json::array();
    for (const auto& w : s.contract.withdrawals) {
        withdrawals.push_back({{"from_year", w.from_year}, {"to_year", w.to_year}, {"rate", w.rate}});
    }
    const CommandSettings& c = rc.commands;
    return {
        {"market",
         {{"nu", s.market.nu},
          {"rho_rev", s.market.rho_rev},
          {"kappa", s.market.kappa},
          {"v0", s.market.v0},
          {"rho", s.market.rho},
          {"lambda", s.market.lambda},
          {"delta", s.market.delta},
          {"chi", s.market.chi},
          {"r", s.market.r}}},
        {"premia", {{"eta_s", s.premia.eta_s}, {"eta_v", s.premia.eta_v}, {"eta_j", s.premia.eta_j}}},
        {"fee", {{"q", s.fee.q}, {"c_bar", s.fee.c_bar}, {"m", s.fee.m}, {"jump_term", to_string(s.fee.jump_term)}}},
        {"contract", s.contract.has_withdrawals()
                         ? json{{"f0", s.contract.f0}, {"withdrawals", withdrawals}}
                         : json{{"f0", s.contract.f0}, {"term", s.contract.term}}},
        {"sim",
         {{"n_paths", s.n_paths},
          {"h", s.h},
          {"seed", s.seed},
          {"epsilon", s.epsilon},
          {"q1", s.branch.q1},
          {"q2", s.branch.q2},
          {"branching", s.branching},
          {"sub_steps", s.sub_steps},
          {"bridge_levels", s.bridge_levels},
          {"memory", to_string(s.memory)},
          {"pooled", s.pooled},
          {"threads", s.threads},
          {"batches", s.batches},
          {"absorption", to_string(s.absorption)},
          {"measure", to_string(s.measure)}}},
        {"commands",
         {{"fair_fee",
           {{"m_list", c.m_list},
            {"lo", c.fair.lo},
            {"hi", c.fair.hi},
            {"tol", c.fair.tol},
            {"stop_within_error", c.fair.stop_within_error},
            {"method", c.fair.method == RootMethod::Illinois ? "illinois" : "bisection"},
            {"max_iterations", c.fair.max_iterations}}},
          {"sensitivity",
           {{"v0_grid", c.v0_grid},
            {"m_grid", c.m_list},
            {"c_bar", c.sweep_c_bar},
            {"fee_mode", to_string(c.fee_mode)},
            {"measure", to_string(c.sweep_measure)}}},
          {"fee_curve", {{"c_bar_grid", c.c_bar_grid}}},
          {"loss_dist", {{"zeta", c.zeta}, {"write_samples", c.write_samples}}},
          {"validate", {{"euler_h", c.euler_h}, {"n_paths", c.validate_paths}}}}},
    };
}

json to_json(const DerivedConstants& d) {
    const KernelCoefficients& k = d.kernel;
    return {{"phi", d.phi},     {"tau_bar", d.tau_bar}, {"A", d.A},         {"B", d.B},
            {"alpha0", d.alpha0}, {"alpha", d.alpha},   {"mu", d.mu},       {"n", k.n},
            {"nu_kappa", k.nu_kappa}, {"mu_kappa", k.mu_kappa}, {"a", k.a}, {"b", k.b},
            {"c", k.c},         {"d", k.d},             {"e", k.e},         {"f", k.f}};
}

}  // namespace gmwb
