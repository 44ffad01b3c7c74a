#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hric/guidance.hpp"
#include "oracles.hpp"

using namespace hric;

namespace {

GuidanceInput make_input(std::size_t M, std::size_t N, double gain = 1e-9, std::int64_t users = 4,
                         double rate = 12.5) {
    GuidanceInput input{M, N, {}};
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t n = 0; n < N; ++n) {
            SbsGuidanceInput e{gain, users, rate, {}};
            for (std::size_t o = 0; o < M; ++o) {
                if (o != m) e.interference.push_back({SbsId{o, n}, gain * 1e-3});
            }
            input.sbs.push_back(e);
        }
    }
    return input;
}

class CannedProvider final : public GuidanceProvider {
  public:
    explicit CannedProvider(CompletionResult reply) : reply_(std::move(reply)) {}
    CompletionResult complete(const GuidanceRequest&) override { return reply_; }
    std::string name() const override { return "canned"; }

  private:
    CompletionResult reply_;
};

class ThrowingProvider final : public GuidanceProvider {
  public:
    CompletionResult complete(const GuidanceRequest&) override { throw std::runtime_error("boom"); }
    std::string name() const override { return "throwing"; }
};

void check_uniform(const GuidancePolicy& p, std::size_t M, std::size_t N) {
    REQUIRE(p.num_mbs() == M);
    REQUIRE(p.num_sbs() == N);
    for (double v : p.values()) CHECK(v == doctest::Approx(1.0 / static_cast<double>(N)));
}

}  // namespace

TEST_SUITE("guidance") {

TEST_CASE("validate_input") {
    const GuidanceInput ok = make_input(1, 2);
    const ValidationResult accepted = validate_input(ok);
    CHECK(accepted.accepted());
    CHECK(accepted.input == ok);

    GuidanceInput neg = ok;
    neg.at(0, 1).connected_users = -1;
    const auto r1 = validate_input(neg);
    REQUIRE(r1.violations.size() == 1);
    CHECK(r1.violations[0].field == "mbs[0].sbs[1].connected_users");

    GuidanceInput loud = ok;
    loud.at(0, 0).avg_channel_gain = 1.0;
    const auto r2 = validate_input(loud);
    REQUIRE_FALSE(r2.accepted());
    CHECK(r2.violations[0].field == "mbs[0].sbs[0].avg_channel_gain");

    GuidanceInput bad_rate = ok;
    bad_rate.at(0, 0).avg_expected_rate_mbps = -0.5;
    CHECK_FALSE(validate_input(bad_rate).accepted());
}

TEST_CASE("prompt template") {
    const NetworkConfig config;
    const Prompt p = build_prompt(make_input(3, 6), config);
    const std::string text = p.text();
    CHECK(text.find("You are an expert in wireless communications") != std::string::npos);
    CHECK(text.find("Ensure the total power allocation across SBSs for each MBS sums to 1.") != std::string::npos);
    CHECK(text.find("MBSX: [value1, value2, value3, value4, value5, value6]") != std::string::npos);
    for (int m = 1; m <= 3; ++m) CHECK(text.find("MBS" + std::to_string(m) + ":\n") != std::string::npos);
    std::size_t entries = 0;
    for (std::size_t pos = 0; (pos = text.find("\nSBS", pos)) != std::string::npos; ++pos) ++entries;
    CHECK(entries == 18);
    CHECK(build_prompt(make_input(3, 6), config).text() == text);
}

TEST_CASE("parse examples") {
    const auto r = parse_guidance("MBS1: [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]", 1, 6);
    REQUIRE(std::holds_alternative<GuidancePolicy>(r));
    const auto& p = std::get<GuidancePolicy>(r);
    CHECK(p.at(0, 0) == doctest::Approx(0.1));
    CHECK(p.at(0, 5) == doctest::Approx(0.2));

    const auto scaled = parse_guidance("Sure!\n**MBS1:** [0.495, 0.495]\nthanks", 1, 2);
    REQUIRE(std::holds_alternative<GuidancePolicy>(scaled));
    CHECK(std::get<GuidancePolicy>(scaled).at(0, 0) == doctest::Approx(0.495 / 0.99).epsilon(1e-15));

    auto kind = [](const ParseResult& res) { return std::get<ParseError>(res).kind; };
    CHECK(kind(parse_guidance("MBS1: [0.5, 0.5]", 1, 6)) == ParseErrorKind::WrongArity);
    CHECK(kind(parse_guidance("MBS1: [0.5, 0.5]", 2, 2)) == ParseErrorKind::MissingMbs);
    CHECK(kind(parse_guidance("MBS1: [0.5, abc]", 1, 2)) == ParseErrorKind::NonNumeric);
    CHECK(kind(parse_guidance("MBS1: [1.5, -0.5]", 1, 2)) == ParseErrorKind::NegativeValue);
    CHECK(kind(parse_guidance("MBS1: [0.6, 0.6]", 1, 2)) == ParseErrorKind::RowSumOutOfTolerance);
    CHECK(kind(parse_guidance("MBS1: [0.5, 0.5]\nMBS1: [0.5, 0.5]", 1, 2)) == ParseErrorKind::DuplicateMbs);
    CHECK(kind(parse_guidance("MBS3: [0.5, 0.5]", 1, 2)) == ParseErrorKind::UnexpectedMbs);
    CHECK(kind(parse_guidance("", 1, 2)) == ParseErrorKind::MissingMbs);
}

TEST_CASE("parse is the inverse of serialize") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t M = 1 + rng() % 4, N = 1 + rng() % 8;
        std::vector<double> flat;
        for (std::size_t m = 0; m < M; ++m) {
            const auto row = hric::testing::random_simplex(N, rng);
            flat.insert(flat.end(), row.begin(), row.end());
        }
        const GuidancePolicy policy(M, N, flat);
        const auto parsed = parse_guidance(serialize_policy(policy), M, N);
        REQUIRE(std::holds_alternative<GuidancePolicy>(parsed));
        const auto& back = std::get<GuidancePolicy>(parsed);
        for (std::size_t i2 = 0; i2 < flat.size(); ++i2) CHECK(back.values()[i2] == doctest::Approx(flat[i2]).epsilon(1e-12));
    }
}

TEST_CASE("fallback paths") {
    const NetworkConfig config;
    const GuidanceInput input = make_input(3, 6);

    CannedProvider failing(RequestError{RequestErrorKind::Transport, 0, "down"});
    const auto a = guidance_with_fallback(input, config, failing);
    CHECK(a.fallback_used);
    CHECK(a.failed_stage == GuidanceStage::Request);
    check_uniform(a.policy, 3, 6);

    const std::string text = "MBS1: [0.5, 0.5, 0, 0, 0, 0]\nMBS2: [1, 0, 0, 0, 0, 0]\nMBS3: [0, 0, 0, 0, 0, 1]";
    CannedProvider valid(text);
    const auto b = guidance_with_fallback(input, config, valid);
    CHECK_FALSE(b.fallback_used);
    CHECK(b.policy.at(1, 0) == 1.0);
    CHECK(b.raw_response == text);

    CannedProvider malformed(std::string("I cannot help with that."));
    const auto c = guidance_with_fallback(input, config, malformed);
    CHECK(c.fallback_used);
    CHECK(c.failed_stage == GuidanceStage::Parse);
    check_uniform(c.policy, 3, 6);

    ThrowingProvider thrower;
    CHECK(guidance_with_fallback(input, config, thrower).fallback_used);

    GuidanceInput invalid = input;
    invalid.at(2, 2).connected_users = -3;
    HeuristicProvider heuristic;
    const auto d = guidance_with_fallback(invalid, config, heuristic);
    CHECK(d.failed_stage == GuidanceStage::Validation);
    CHECK(d.detail.find("mbs[2].sbs[2].connected_users") != std::string::npos);
    check_uniform(d.policy, 3, 6);
}

TEST_CASE("fuzzed provider output never breaks the policy invariants") {
    const NetworkConfig config;
    const GuidanceInput input = make_input(3, 6);
    std::mt19937_64 rng(4);
    const std::string alphabet = "MBS0123456789:[], .-e\nabc*";
    const std::string valid = "MBS1: [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]\nMBS2: [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]\n"
                              "MBS3: [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]";
    for (int i = 0; i < 1000; ++i) {
        std::string text = valid;
        const int edits = 1 + static_cast<int>(rng() % 6);
        for (int e = 0; e < edits; ++e) text[rng() % text.size()] = alphabet[rng() % alphabet.size()];
        CannedProvider provider(text);
        const auto out = guidance_with_fallback(input, config, provider);
        REQUIRE(out.policy.num_mbs() == 3);
        for (std::size_t m = 0; m < 3; ++m) CHECK(on_simplex(out.policy.row(m)));
    }
}

TEST_CASE("heuristic guidance") {
    GuidanceInput sym = make_input(2, 4);
    const auto uniform = heuristic_guidance(sym);
    for (double v : uniform.values()) CHECK(v == doctest::Approx(0.25));

    GuidanceInput ratio = make_input(1, 2);
    ratio.at(0, 0).connected_users = 1;
    const auto r = heuristic_guidance(ratio);
    CHECK(r.at(0, 0) == doctest::Approx(0.2));
    CHECK(r.at(0, 1) == doctest::Approx(0.8));

    GuidanceInput empty = make_input(1, 3);
    empty.at(0, 1).connected_users = 0;
    CHECK(heuristic_guidance(empty).at(0, 1) == 0.0);

    GuidanceInput scaled = empty;
    for (auto& e : scaled.sbs) e.connected_users *= 3;
    const auto a = heuristic_guidance(empty), b = heuristic_guidance(scaled);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-15));
}

TEST_CASE("audit log writes one JSON line per cycle") {
    std::ostringstream out;
    GuidanceAuditLog log(out);
    HeuristicProvider provider;
    const NetworkConfig config;
    log.record(guidance_with_fallback(make_input(3, 6), config, provider));
    CannedProvider bad(std::string("nope"));
    log.record(guidance_with_fallback(make_input(3, 6), config, bad));
    std::istringstream in(out.str());
    std::string line;
    std::vector<nlohmann::json> records;
    while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
    REQUIRE(records.size() == 2);
    CHECK(records[0]["fallback"] == false);
    CHECK(records[0]["parse_outcome"] == "ok");
    CHECK(records[1]["fallback"] == true);
    CHECK(records[1]["raw_response"] == "nope");
    CHECK(records[0]["prompt_hash"].get<std::string>().size() == 16);
}

}
