#pragma once

// Non-real-time guidance pipeline: validate the averaged network statistics,
// render the prompt, ask a provider for an allocation, parse and verify the
// answer, and fall back to equal power whenever any stage fails.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hric/policy.hpp"
#include "hric/topology.hpp"

namespace hric {

struct ValidationBounds {
    double min_gain = 1e-15;  // -150 dB
    double max_gain = 1e-3;   // -30 dB
};

struct ValidationIssue {
    std::string field;       // e.g. "mbs[0].sbs[2].connected_users"
    std::string constraint;  // e.g. ">= 0"
};

struct ValidationResult {
    GuidanceInput input;
    std::vector<ValidationIssue> violations;

    [[nodiscard]] bool accepted() const noexcept { return violations.empty(); }
};

/// Range checks on every field; never throws.
[[nodiscard]] ValidationResult validate_input(const GuidanceInput& input, const ValidationBounds& bounds = {});

struct Prompt {
    std::string system;
    std::string user;

    /// The full prompt as a single text (system line, newline, user part).
    [[nodiscard]] std::string text() const { return system + "\n" + user; }
};

/// Renders the structured allocation prompt. Gains are shown in dB with one
/// decimal, rates in Mb/s with two.
[[nodiscard]] Prompt build_prompt(const GuidanceInput& input, const NetworkConfig& config);

enum class ParseErrorKind {
    MissingMbs,
    DuplicateMbs,
    UnexpectedMbs,
    WrongArity,
    NonNumeric,
    NegativeValue,
    RowSumOutOfTolerance,
};

struct ParseError {
    ParseErrorKind kind = ParseErrorKind::MissingMbs;
    std::size_t mbs = 0;  // 1-based as in the text; 0 when not tied to a row
    std::string detail;
};

[[nodiscard]] std::string_view to_string(ParseErrorKind kind) noexcept;

using ParseResult = std::variant<GuidancePolicy, ParseError>;

/// Extracts "MBS<i>: [v1, ..., vN]" lines (i is 1-based) from free text.
/// Rows summing to within [0.98, 1.02] are renormalized to sum 1.
[[nodiscard]] ParseResult parse_guidance(std::string_view raw_text, std::size_t num_mbs, std::size_t num_sbs);

/// One "MBS<i>: [...]" line per row, shortest round-trip decimal form.
[[nodiscard]] std::string serialize_policy(const GuidancePolicy& policy);

enum class RequestErrorKind { Timeout, Transport, HttpStatus, EmptyCompletion, MalformedResponse };

struct RequestError {
    RequestErrorKind kind = RequestErrorKind::Transport;
    int http_status = 0;
    std::string message;
};

[[nodiscard]] std::string_view to_string(RequestErrorKind kind) noexcept;

using CompletionResult = std::variant<std::string, RequestError>;

struct GuidanceRequest {
    const GuidanceInput& input;
    const Prompt& prompt;
};

/// Something that answers a guidance prompt with raw text.
class GuidanceProvider {
  public:
    virtual ~GuidanceProvider() = default;
    [[nodiscard]] virtual CompletionResult complete(const GuidanceRequest& request) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Row m, entry n proportional to users * sqrt(gain / (1e-15 + sum of
/// interference gains)); rows with no mass fall back to uniform.
[[nodiscard]] GuidancePolicy heuristic_guidance(const GuidanceInput& input);

/// Deterministic offline provider: answers with serialize_policy(heuristic_guidance(input)).
class HeuristicProvider final : public GuidanceProvider {
  public:
    [[nodiscard]] CompletionResult complete(const GuidanceRequest& request) override;
    [[nodiscard]] std::string name() const override { return "heuristic"; }
};

enum class GuidanceStage { None, Validation, Request, Parse };

[[nodiscard]] std::string_view to_string(GuidanceStage stage) noexcept;

struct GuidanceOutcome {
    GuidancePolicy policy;
    bool fallback_used = false;
    GuidanceStage failed_stage = GuidanceStage::None;
    std::string detail;
    std::string prompt_text;
    std::string raw_response;
};

/// validate -> prompt -> request -> parse; any failure yields the uniform policy.
[[nodiscard]] GuidanceOutcome guidance_with_fallback(const GuidanceInput& input, const NetworkConfig& config,
                                                     GuidanceProvider& provider);

/// 64-bit FNV-1a, used to fingerprint prompts and configurations.
[[nodiscard]] std::uint64_t fnv1a_64(std::string_view text) noexcept;

/// Line-delimited JSON record per guidance cycle.
class GuidanceAuditLog {
  public:
    explicit GuidanceAuditLog(std::ostream& out);
    void record(const GuidanceOutcome& outcome);

  private:
    std::ostream* out_;
};

}  // namespace hric
