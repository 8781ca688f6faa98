#include "gmwb/config.hpp"
#include "gmwb/csv.hpp"

#include <doctest.h>

#include <sstream>

using namespace gmwb;

TEST_CASE("empty document gives the defaults") {
    const RunConfig rc = parse_config("{}");
    CHECK(rc.sim.market.nu == 0.18);
    CHECK(rc.sim.n_paths == 50000);
    CHECK(rc.sim.contract.maturity() == doctest::Approx(100.0 / 7.0));
    CHECK(rc.sim.fee.jump_term == JumpFeeTerm::Unscaled);
    CHECK(rc.commands.m_list == std::vector<double>{0.0, 0.1, 0.2, 0.3});
}

TEST_CASE("sections and enums") {
    const RunConfig rc = parse_config(R"({
        "market": {"nu": 0.1773, "v0": 0.06},
        "premia": {"eta_s": 0.6667, "eta_v": -2, "eta_j": 0.0011414},
        "fee": {"q": 0.0075, "c_bar": 0.0103, "m": 0.3, "jump_term": "scaled"},
        "contract": {"f0": 100, "withdrawals": [{"from_year": 0, "to_year": 10, "rate": 0},
                                                 {"from_year": 10, "to_year": 20, "rate": 10}]},
        "sim": {"n_paths": 1000, "batches": 10, "memory": "ancestry-replay", "absorption": "interpolated",
                "measure": "P", "seed": 7, "sub_steps": 2},
        "commands": {"fair_fee": {"m_list": [0.1], "method": "illinois"},
                     "loss_dist": {"zeta": 0.95}}
    })");
    CHECK(rc.sim.market.nu == 0.1773);
    CHECK(rc.sim.market.v0 == 0.06);
    CHECK(rc.sim.premia.eta_v == -2.0);
    CHECK(rc.sim.fee.jump_term == JumpFeeTerm::ScaledByMultiplier);
    CHECK(rc.sim.contract.maturity() == doctest::Approx(20.0));
    CHECK(rc.sim.memory == MemoryMode::AncestryReplay);
    CHECK(rc.sim.absorption == AbsorptionTiming::Interpolated);
    CHECK(rc.sim.measure == Measure::P);
    CHECK(rc.sim.seed == 7);
    CHECK(rc.sim.sub_steps == 2);
    CHECK(rc.commands.fair.method == RootMethod::Illinois);
    CHECK(rc.commands.zeta == 0.95);

    const RunConfig acc = parse_config(R"({"contract": {"f0": 50, "term": 3}})");
    CHECK_FALSE(acc.sim.contract.has_withdrawals());
    CHECK(acc.sim.contract.maturity() == 3.0);
    CHECK(parse_config(R"({"contract": {"f0": 50, "rate": 5}})").sim.contract.maturity() == doctest::Approx(10.0));
}

TEST_CASE("rejections") {
    CHECK_THROWS_AS(parse_config(R"({"market": {"nuu": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"extra": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sim": {"memory": "two-pass"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sim": {"n_paths": -5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sim": {"n_paths": 2.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"market": {"nu": "high"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sim": {"bridge_levels": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"contract": {"f0": 100, "rate": 5, "term": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"([1, 2])"), ConfigError);
}

TEST_CASE("malformed JSON reports line and column") {
    const std::string text = "{\n  \"sim\": {\n    \"n_paths\": 10,\n  }\n}";
    try {
        parse_config(text);
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(e.line() == 4);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("resolved document round-trips") {
    const RunConfig rc = parse_config(R"({"fee": {"c_bar": 0.02, "m": 0.2}, "sim": {"n_paths": 300, "batches": 3},
                                          "contract": {"f0": 100, "withdrawals": [{"from_year": 0, "to_year": 5, "rate": 20}]}})");
    const nlohmann::json doc = to_json(rc);
    const RunConfig back = config_from_json(doc);
    CHECK(to_json(back) == doc);
    CHECK(doc.at("sim").at("n_paths") == 300);
    CHECK(doc.at("fee").at("jump_term") == "unscaled");
    const nlohmann::json d = to_json(derive_constants(rc.sim.market, rc.sim.fee));
    CHECK(d.at("n") == 2);
    CHECK(d.contains("alpha0"));
}

TEST_CASE("csv formatting") {
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"a", "b,c", "say \"hi\""});
    w.row({0.1, 3LL, std::string("x")});
    CHECK(w.rows() == 2);
    CHECK(os.str() == "a,\"b,c\",\"say \"\"hi\"\"\"\r\n0.10000000000000001,3,x\r\n");
}
