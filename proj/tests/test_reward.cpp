#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scenelab/errors.hpp"
#include "scenelab/reward.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

using namespace scenelab;
using namespace scenelab::testing;

namespace {

// independent brute-force reading of the consistency reward
double lcr_oracle(int trace_len, const std::string& a, const std::string& tilde, const std::string& gold,
                  double alpha, double eta) {
    double phi = 0.0, omega = 0.0;
    if (a == gold && tilde == gold) phi = alpha;
    if (a != tilde) omega = eta;
    return std::log(std::exp(1.0) + trace_len) * phi - omega;
}

PermutationRecord make_record(const std::string& a, const std::string& tilde) {
    PermutationRecord r;
    r.mapping = {1, 0};
    r.a_slot = 0;
    r.a_content = a;
    r.a_tilde_slot = 1;
    r.a_tilde_content = tilde;
    r.drift = a != tilde;
    return r;
}

} // namespace

TEST_CASE("permute_options: bookkeeping, non-identity, gold preserved") {
    const McqSample q = make_question({"w", "x", "y", "z"}, "y");
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        const auto [permuted, record] = permute_options(q, rng);
        REQUIRE(record.mapping.size() == 4);
        bool identity = true;
        std::set<int> seen;
        for (int j = 0; j < 4; ++j) {
            const int from = record.mapping[static_cast<std::size_t>(j)];
            seen.insert(from);
            identity = identity && from == j;
            CHECK(permuted.options[static_cast<std::size_t>(j)] == q.options[static_cast<std::size_t>(from)]);
        }
        CHECK(seen.size() == 4); // a bijection
        CHECK(!identity);
        CHECK(permuted.stem == q.stem);
        CHECK(permuted.gold_content == q.gold_content);
        CHECK(permuted.gold_slot() >= 0);
    }
}

TEST_CASE("permute_options: identity never appears in 10,000 draws") {
    const McqSample q = make_question({"a", "b", "c", "d"}, "a");
    Rng rng(123);
    for (int i = 0; i < 10000; ++i) {
        const auto [permuted, record] = permute_options(q, rng);
        bool identity = true;
        for (int j = 0; j < 4; ++j) identity = identity && record.mapping[static_cast<std::size_t>(j)] == j;
        CHECK(!identity);
    }
}

TEST_CASE("permute_options: two options always swap") {
    const McqSample q = make_question({"rural", "urban"}, "rural");
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto [permuted, record] = permute_options(q, rng);
        CHECK(record.mapping == std::vector<int>{1, 0});
        CHECK(permuted.options == std::vector<std::string>{"urban", "rural"});
    }
}

TEST_CASE("accuracy_reward: exact content match only") {
    RewardConfig cfg;
    CHECK(accuracy_reward("3", "3", cfg) == 1.0);
    CHECK(accuracy_reward("3", "5", cfg) == 0.0);
    CHECK(accuracy_reward("Red", "red", cfg) == 0.0);
    CHECK(accuracy_reward("red ", "red", cfg) == 0.0);
}

TEST_CASE("format_reward: well-formed, truncated, mismatched") {
    RewardConfig cfg;
    const McqSample q = make_question({"a", "b", "c", "d"}, "a");

    Trajectory good;
    good.trace = {atom_dominant_color(Color::red)};
    good.answer_slot = 2;
    good.answer_content = "c";
    good.well_formed = true;
    CHECK(format_reward(good, q, cfg, 6, 24) == 0.5);

    Trajectory truncated = good;
    truncated.trace.assign(6, atom_dominant_color(Color::red)); // l_max atoms, no STOP
    CHECK(format_reward(truncated, q, cfg, 6, 24) == 0.0);

    Trajectory mismatched = good;
    mismatched.answer_content = "b";
    CHECK(format_reward(mismatched, q, cfg, 6, 24) == 0.0);

    Trajectory bad_slot = good;
    bad_slot.answer_slot = 9;
    CHECK(format_reward(bad_slot, q, cfg, 6, 24) == 0.0);

    Trajectory bad_atom = good;
    bad_atom.trace = {atom_count_eq(ObjectClass::vehicle, -3)};
    CHECK(format_reward(bad_atom, q, cfg, 6, 24) == 0.0);
}

TEST_CASE("lcr: named example values") {
    RewardConfig cfg; // alpha = eta = 0.5

    CHECK(lcr(0, make_record("g", "g"), "g", cfg) == doctest::Approx(0.5).epsilon(1e-12)); // ln(e) = 1
    CHECK(lcr(3, make_record("g", "x"), "g", cfg) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(lcr(2, make_record("x", "y"), "g", cfg) == doctest::Approx(-0.5).epsilon(1e-12));

    const double expected = 0.5 * std::log(std::exp(1.0) + 4.0);
    CHECK(lcr(4, make_record("g", "g"), "g", cfg) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(lcr(4, make_record("g", "g"), "g", cfg) == doctest::Approx(0.9524).epsilon(2e-4));

    PermutationRecord incomplete = make_record("g", "g");
    incomplete.a_tilde_slot = -1;
    CHECK_THROWS_AS(lcr(1, incomplete, "g", cfg), PermutationMismatch);
}

TEST_CASE("lcr: exhaustive truth table against the brute-force oracle") {
    RewardConfig cfg;
    cfg.alpha = 0.7;
    cfg.eta = 0.3;
    const std::string gold = "G";
    const std::pair<std::string, std::string> cases[] = {
        {"G", "G"}, {"G", "X"}, {"X", "G"}, {"X", "X"}, {"X", "Y"},
    };
    for (int len = 0; len <= 6; ++len) {
        for (const auto& [a, tilde] : cases) {
            const double got = lcr(len, make_record(a, tilde), gold, cfg);
            const double want = lcr_oracle(len, a, tilde, gold, cfg.alpha, cfg.eta);
            CHECK(std::abs(got - want) < 1e-12);
            // the bonus and the penalty are mutually exclusive
            const bool phi_fires = a == gold && tilde == gold;
            const bool omega_fires = a != tilde;
            CHECK(!(phi_fires && omega_fires));
        }
    }
}

TEST_CASE("lcr stays within [-eta, ln(e + l_max) * alpha]") {
    RewardConfig cfg;
    const double lo = -cfg.eta;
    const double hi = std::log(std::exp(1.0) + 6.0) * cfg.alpha;
    const char* contents[] = {"G", "X", "Y"};
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const int len = static_cast<int>(rng.next_below(7));
        const auto rec = make_record(contents[rng.next_below(3)], contents[rng.next_below(3)]);
        const double r = lcr(len, rec, "G", cfg);
        CHECK(r >= lo - 1e-15);
        CHECK(r <= hi + 1e-15);
    }
}

TEST_CASE("compose_reward: totals are exact sums") {
    RewardConfig cfg;
    const McqSample q = make_question({"g", "b", "c", "d"}, "g");

    Trajectory traj;
    traj.trace.assign(4, atom_dominant_color(Color::red));
    traj.answer_slot = 0;
    traj.answer_content = "g";
    traj.well_formed = true;

    const RewardBreakdown r = compose_reward(traj, q, make_record("g", "g"), cfg, 6, 24);
    CHECK(r.r_acc == 1.0);
    CHECK(r.r_fmt == 0.5);
    CHECK(r.r_lcr == doctest::Approx(0.5 * std::log(std::exp(1.0) + 4.0)).epsilon(1e-12));
    CHECK(r.total == r.r_acc + r.r_fmt + r.r_lcr);
    CHECK(r.total == doctest::Approx(2.4524).epsilon(2e-4));

    // worst case: wrong, malformed, contradictory
    Trajectory bad;
    bad.trace.assign(6, atom_dominant_color(Color::red));
    bad.answer_slot = 1;
    bad.answer_content = "b";
    const RewardBreakdown w = compose_reward(bad, q, make_record("b", "c"), cfg, 6, 24);
    CHECK(w.r_acc == 0.0);
    CHECK(w.r_fmt == 0.0);
    CHECK(w.r_lcr == -0.5);
    CHECK(w.total == -0.5);
}

TEST_CASE("compose_reward: omega only fires when the second answer differs") {
    RewardConfig cfg;
    const McqSample q = make_question({"g", "b"}, "g");
    Trajectory traj;
    traj.trace = {atom_dominant_color(Color::red)};
    traj.answer_slot = 0;
    traj.answer_content = "g";
    traj.well_formed = true;

    // a = gold and consistent: no penalty possible
    const RewardBreakdown consistent = compose_reward(traj, q, make_record("g", "g"), cfg, 6, 24);
    CHECK(consistent.r_lcr > 0.0);
    // a = gold but the frozen pass moved: penalty, no bonus
    const RewardBreakdown drifted = compose_reward(traj, q, make_record("g", "b"), cfg, 6, 24);
    CHECK(drifted.r_lcr == -0.5);
}

TEST_CASE("classify_alignment covers the 2x2 grid") {
    CHECK(classify_alignment(true, true) == AlignmentCell::cr_ca);
    CHECK(classify_alignment(true, false) == AlignmentCell::cr_wa);
    CHECK(classify_alignment(false, true) == AlignmentCell::wr_ca);
    CHECK(classify_alignment(false, false) == AlignmentCell::wr_wa);
    CHECK(std::string(name_of(AlignmentCell::wr_ca)) == "WR-CA");
}

TEST_CASE("reward config validation") {
    RewardConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 0.5;
    cfg.eta = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("audit record is valid JSONL with the documented fields") {
    RewardBreakdown r;
    r.r_acc = 1.0;
    r.r_fmt = 0.5;
    r.r_lcr = 0.25;
    r.total = 1.75;
    const std::string line = audit_record_json("mcq-000007", 3, make_record("g", "g"), r, AlignmentCell::cr_ca);
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("sample_id") == "mcq-000007");
    CHECK(j.at("L_t") == 3);
    CHECK(j.at("permutation") == nlohmann::json::array({1, 0}));
    CHECK(j.at("a") == "g");
    CHECK(j.at("a_tilde") == "g");
    CHECK(j.at("r_acc") == 1.0);
    CHECK(j.at("r_fmt") == 0.5);
    CHECK(j.at("r_lcr") == 0.25);
    CHECK(j.at("total") == 1.75);
    CHECK(j.at("alignment_cell") == "CR-CA");
}
