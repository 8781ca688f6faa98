// gmwb: fair fees, net liability, loss distributions and sweeps for GMWB riders.

#include "gmwb/config.hpp"
#include "gmwb/csv.hpp"
#include "gmwb/oracle.hpp"
#include "gmwb/validation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gmwb;

namespace {

struct Output {
    std::string file;
    std::string body;
    std::size_t rows = 0;
};

struct Rows {
    std::ostringstream text;
    CsvWriter csv{text};
};

Output finish(const std::string& file, Rows& rows) { return {file, rows.text.str(), rows.csv.rows()}; }

std::string fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

long long as_int(std::size_t v) { return static_cast<long long>(v); }

std::vector<Output> cmd_fair_fee(const RunConfig& rc) {
    if (rc.commands.m_list.empty()) throw ConfigError("fair-fee needs a nonempty m list");
    Rows r;
    r.csv.row({"m", "c_bar_star_pct", "std_error", "net_liability", "net_liability_se", "evaluations", "n_paths",
               "h", "seed"});
    for (double m : rc.commands.m_list) {
        const FairFeeResult f = fair_base_fee(m, rc.sim, rc.commands.fair);
        r.csv.row({m, 100.0 * f.c_bar, 100.0 * f.std_error, f.liability.value, f.liability.std_error,
                   static_cast<long long>(f.evaluations), as_int(rc.sim.n_paths), rc.sim.h,
                   static_cast<long long>(rc.sim.seed)});
    }
    return {finish("fair_fee.csv", r)};
}

std::vector<Output> cmd_net_liability(const RunConfig& rc) {
    const SimulationResult res = simulate(rc.sim);
    const FeePayout fp = fee_and_payout(res);
    Rows r;
    r.csv.row({"c_bar", "m", "v0", "measure", "net_liability", "std_error", "fee", "fee_se", "payout", "payout_se",
               "n_effective", "n_paths", "h", "seed"});
    r.csv.row({rc.sim.fee.c_bar, rc.sim.fee.m, rc.sim.market.v0, to_string(rc.sim.measure), fp.net.value,
               fp.net.std_error, fp.fee.value, fp.fee.std_error, fp.payout.value, fp.payout.std_error,
               fp.net.n_effective, as_int(rc.sim.n_paths), rc.sim.h, static_cast<long long>(rc.sim.seed)});
    return {finish("net_liability.csv", r)};
}

std::vector<Output> cmd_fee_curve(const RunConfig& rc) {
    if (rc.commands.c_bar_grid.empty()) throw ConfigError("fee-curve needs a nonempty c_bar grid");
    Rows r;
    r.csv.row({"c_bar", "m", "fee", "fee_se", "payout", "payout_se", "net_liability", "net_liability_se"});
    for (double c : rc.commands.c_bar_grid) {
        SimConfig cfg = rc.sim;
        cfg.fee.c_bar = c;
        const FeePayout fp = fee_and_payout(cfg);
        r.csv.row({c, cfg.fee.m, fp.fee.value, fp.fee.std_error, fp.payout.value, fp.payout.std_error, fp.net.value,
                   fp.net.std_error});
    }
    return {finish("fee_curve.csv", r)};
}

std::vector<Output> cmd_loss_dist(const RunConfig& rc) {
    const LossDistribution dist(loss_samples(rc.sim));
    const LossSummary s = summary(dist, rc.commands.zeta);
    std::vector<Output> outs;
    Rows sum;
    sum.csv.row({"statistic", "value", "std_error", "zeta", "n_paths", "measure"});
    const std::string measure = to_string(rc.sim.measure);
    const long long n = as_int(rc.sim.n_paths);
    sum.csv.row({"mean", s.mean.value, s.mean.std_error, s.zeta, n, measure});
    sum.csv.row({"variance", s.variance.value, s.variance.std_error, s.zeta, n, measure});
    sum.csv.row({"var", s.var, 0.0, s.zeta, n, measure});
    sum.csv.row({"cte", s.cte.value, s.cte.std_error, s.zeta, n, measure});
    outs.push_back(finish("loss_summary.csv", sum));
    if (rc.commands.write_samples) {
        Rows smp;
        smp.csv.row({"value", "weight", "batch"});
        for (const auto& x : dist.samples()) smp.csv.row({x.value, x.weight, static_cast<long long>(x.batch)});
        outs.push_back(finish("loss_samples.csv", smp));
    }
    return outs;
}

std::vector<Output> cmd_sensitivity(const RunConfig& rc) {
    SweepOptions opt;
    opt.v0_grid = rc.commands.v0_grid;
    opt.m_grid = rc.commands.m_list;
    opt.c_bar = rc.commands.sweep_c_bar;
    opt.fee_mode = rc.commands.fee_mode;
    opt.measure = rc.commands.sweep_measure;
    opt.fair = rc.commands.fair;
    opt.zeta = rc.commands.zeta;
    const std::vector<SweepCell> cells = sensitivity_sweep(rc.sim, opt);
    Rows r;
    r.csv.row({"v0", "m", "c_bar", "fee_mode", "measure", "net_liability", "std_error", "loss_mean", "loss_mean_se",
               "loss_variance", "loss_variance_se", "loss_var", "loss_cte", "loss_cte_se"});
    for (const auto& c : cells) {
        std::vector<CsvField> row{c.v0, c.m, c.c_bar, to_string(opt.fee_mode), to_string(opt.measure),
                                  c.net_liability.value, c.net_liability.std_error};
        if (c.loss) {
            const LossSummary& s = *c.loss;
            for (CsvField f : std::initializer_list<CsvField>{s.mean.value, s.mean.std_error, s.variance.value,
                                                              s.variance.std_error, s.var, s.cte.value,
                                                              s.cte.std_error}) {
                row.push_back(f);
            }
        } else {
            for (int i = 0; i < 7; ++i) row.emplace_back(std::string());
        }
        r.csv.row(row);
    }
    return {finish("sensitivity.csv", r)};
}

std::vector<Output> cmd_validate(const RunConfig& rc, bool& all_pass) {
    const std::vector<CheckResult> checks = run_validation(rc);
    Rows r;
    r.csv.row({"check", "value", "reference", "tolerance", "pass", "detail"});
    all_pass = true;
    for (const auto& c : checks) {
        r.csv.row({c.name, c.value, c.reference, c.tolerance, std::string(c.pass ? "pass" : "fail"), c.detail});
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " reference=" << c.reference
                  << " tolerance=" << c.tolerance << "\n";
        all_pass = all_pass && c.pass;
    }
    return {finish("validate.csv", r)};
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

int execute(const std::string& command, RunConfig rc, const fs::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::vector<Output> outputs;
    if (command == "fair-fee") {
        outputs = cmd_fair_fee(rc);
    } else if (command == "net-liability") {
        outputs = cmd_net_liability(rc);
    } else if (command == "fee-curve") {
        outputs = cmd_fee_curve(rc);
    } else if (command == "loss-dist") {
        outputs = cmd_loss_dist(rc);
    } else if (command == "sensitivity") {
        outputs = cmd_sensitivity(rc);
    } else if (command == "validate") {
        outputs = cmd_validate(rc, ok);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(out_dir);
    json files = json::array();
    for (const auto& o : outputs) {
        write_file(out_dir / o.file, o.body);
        files.push_back({{"file", o.file}, {"rows", o.rows}, {"fnv1a64", fnv1a(o.body)}});
    }
    const json manifest = {
        {"engine", "gmwb"},
        {"version", GMWB_VERSION},
        {"command", command},
        {"config", to_json(rc)},
        {"derived", to_json(derive_constants(rc.sim.market, rc.sim.fee))},
        {"outputs", files},
        {"threads", rc.sim.threads},
        {"wall_time_seconds", wall},
    };
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& o : outputs) std::cout << (out_dir / o.file).string() << "\n";
    return ok ? 0 : 1;
}

void report_error(const std::string& type, const std::string& message, std::optional<std::size_t> line = {},
                  std::optional<std::size_t> column = {}) {
    json err = {{"type", type}, {"message", message}};
    if (line) err["line"] = *line;
    if (column) err["column"] = *column;
    std::cerr << json{{"error", err}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo pricing and risk measurement of GMWB riders with VIX-linked fees"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<double> m_override;
    bool check = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"fair-fee", "solve the fair base fee for each multiplier"},
        {"net-liability", "net liability, expected fees and payout at the configured fee"},
        {"fee-curve", "expected fees and payout over a grid of base fees"},
        {"loss-dist", "weighted loss samples and their mean, variance and CTE"},
        {"sensitivity", "net liability or loss statistics over V0 and m grids"},
        {"validate", "engine self-checks against closed forms and the Euler reference"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed, "master seed, overrides sim.seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
        if (name == "fair-fee" || name == "sensitivity") {
            sub->add_option("--m", m_override, "multipliers, overrides the configured list")->delimiter(',');
        }
    }
    CLI::App* rerun = app.add_subcommand("rerun", "repeat a run recorded in a manifest");
    rerun->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
    rerun->add_option("--out", out_dir, "output directory");
    rerun->add_option("--threads", threads, "worker threads (results do not depend on it)");
    rerun->add_flag("--check", check, "compare output hashes with the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return 2;
    }

    try {
        std::string command;
        RunConfig rc;
        json recorded;
        if (rerun->parsed()) {
            std::ifstream in(manifest_path, std::ios::binary);
            if (!in) throw ConfigError("cannot open manifest " + manifest_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            try {
                recorded = json::parse(buf.str());
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
            }
            command = recorded.at("command").get<std::string>();
            rc = config_from_json(recorded.at("config"));
        } else {
            command = app.get_subcommands().front()->get_name();
            rc = load_config(config_path);
            if (seed) rc.sim.seed = *seed;
            if (!m_override.empty()) rc.commands.m_list = m_override;
        }
        if (threads) rc.sim.threads = *threads;
        rc.sim.validate();

        const int code = execute(command, rc, out_dir);
        if (check) {
            bool same = true;
            for (const auto& o : recorded.at("outputs")) {
                std::ifstream in(fs::path(out_dir) / o.at("file").get<std::string>(), std::ios::binary);
                std::ostringstream buf;
                buf << in.rdbuf();
                const bool match = fnv1a(buf.str()) == o.at("fnv1a64").get<std::string>();
                std::cout << (match ? "MATCH " : "DIFFER ") << o.at("file").get<std::string>() << "\n";
                same = same && match;
            }
            if (!same) {
                report_error("reproducibility", "rerun output differs from the manifest");
                return 4;
            }
        }
        return code;
    } catch (const ConfigParseError& e) {
        report_error("parse", e.what(), e.line(), e.column());
        return 2;
    } catch (const ConfigError& e) {
        report_error("config", e.what());
        return 2;
    } catch (const BracketError& e) {
        report_error("bracket", e.what());
        return 3;
    } catch (const ExtinctionError& e) {
        report_error("extinction", e.what());
        return 3;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return 3;
    }
}
