#include "hric/guidance.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "hric/channel.hpp"

namespace hric {

namespace {

constexpr double kRowSumLow = 0.98;
constexpr double kRowSumHigh = 1.02;
constexpr double kHeuristicEpsilon = 1e-15;

std::string field_name(std::size_t m, std::size_t n, std::string_view leaf) {
    return "mbs[" + std::to_string(m) + "].sbs[" + std::to_string(n) + "]." + std::string(leaf);
}

std::string count_word(std::size_t n) {
    static constexpr std::array<const char*, 13> words = {"zero", "one",   "two",  "three", "four",
                                                          "five", "six",   "seven", "eight", "nine",
                                                          "ten",  "eleven", "twelve"};
    return n < words.size() ? words[n] : std::to_string(n);
}

std::string format(const char* fmt, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value);
    return buf;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string shortest(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

}  // namespace

ValidationResult validate_input(const GuidanceInput& input, const ValidationBounds& bounds) {
    ValidationResult result{input, {}};
    if (input.num_mbs == 0 || input.num_sbs == 0 || input.sbs.size() != input.num_mbs * input.num_sbs) {
        result.violations.push_back({"shape", "sbs entries must equal num_mbs * num_sbs"});
        return result;
    }
    auto gain_ok = [&](double g) { return std::isfinite(g) && g >= bounds.min_gain && g <= bounds.max_gain; };
    const std::string gain_range = "within [" + format("%g", bounds.min_gain) + ", " + format("%g", bounds.max_gain) + "]";
    for (std::size_t m = 0; m < input.num_mbs; ++m) {
        for (std::size_t n = 0; n < input.num_sbs; ++n) {
            const SbsGuidanceInput& entry = input.at(m, n);
            if (entry.connected_users < 0) {
                result.violations.push_back({field_name(m, n, "connected_users"), ">= 0"});
            }
            if (!gain_ok(entry.avg_channel_gain)) {
                result.violations.push_back({field_name(m, n, "avg_channel_gain"), gain_range});
            }
            if (!std::isfinite(entry.avg_expected_rate_mbps) || entry.avg_expected_rate_mbps < 0.0) {
                result.violations.push_back({field_name(m, n, "avg_expected_rate_mbps"), ">= 0"});
            }
            for (std::size_t j = 0; j < entry.interference.size(); ++j) {
                const auto& term = entry.interference[j];
                if (!gain_ok(term.avg_gain)) {
                    result.violations.push_back(
                        {field_name(m, n, "interference[" + std::to_string(j) + "].avg_gain"), gain_range});
                }
                if (term.source.mbs >= input.num_mbs || term.source.sbs >= input.num_sbs) {
                    result.violations.push_back(
                        {field_name(m, n, "interference[" + std::to_string(j) + "].source"), "valid (MBS, SBS) index"});
                }
            }
        }
    }
    return result;
}

Prompt build_prompt(const GuidanceInput& input, const NetworkConfig& config) {
    Prompt prompt;
    prompt.system = "You are an expert in wireless communications for resource allocation.";

    std::ostringstream user;
    user << "Your objective is to maximize the total throughput of all MBSs, where the throughput of each SBS is "
            "the minimum of its backhaul rate and the sum of the access rates of its connected users.\n";
    user << "Here is the system description: There are " << config.num_mbs << " MBSs, each connected to "
         << config.num_sbs_per_mbs << " SBSs. The maximum transmit power of each MBS is "
         << format("%.1f", config.mbs_max_power_dbm) << " dBm. The total bandwidth of each MBS is "
         << format("%.1f", config.total_bandwidth_hz / 1e6) << " MHz, of which a fraction alpha = "
         << format("%.2f", config.backhaul_fraction_alpha)
         << " is allocated to the backhaul links and the remaining bandwidth is assigned to the access links. "
            "SBSs connected to different MBSs that use the same sub-carrier interfere with each other.\n";
    user << "Input Format: For each MBS, you are provided with the following input data for its connected SBSs. "
            "Each SBS is represented as a list: [Average channel gain, number of connected users, average expected "
            "data rate of connected users (Mb/s), and interference: [interference source (MBS, SBS), average "
            "interference channel gain] ].\n";
    for (std::size_t m = 0; m < input.num_mbs; ++m) {
        user << "MBS" << m + 1 << ":\n";
        for (std::size_t n = 0; n < input.num_sbs; ++n) {
            const SbsGuidanceInput& entry = input.at(m, n);
            user << "SBS" << n + 1 << ": [" << format("%.1f", linear_to_db(entry.avg_channel_gain)) << " dB, "
                 << entry.connected_users << ", " << format("%.2f", entry.avg_expected_rate_mbps) << ", [";
            for (std::size_t j = 0; j < entry.interference.size(); ++j) {
                const auto& term = entry.interference[j];
                user << (j == 0 ? "" : ", ") << "[(MBS" << term.source.mbs + 1 << ", SBS" << term.source.sbs + 1
                     << "), " << format("%.1f", linear_to_db(term.avg_gain)) << " dB]";
            }
            user << "]]\n";
        }
    }

    const std::string count = count_word(config.num_sbs_per_mbs);
    user << "Constraints: Ensure the total power allocation across SBSs for each MBS sums to 1. For each MBS, output "
            "the normalized power allocation ratios as a list of "
         << count << " values corresponding to its " << count << " SBSs. MBSX: [";
    for (std::size_t n = 0; n < config.num_sbs_per_mbs; ++n) {
        user << (n == 0 ? "" : ", ") << "value" << n + 1;
    }
    user << "].";
    prompt.user = user.str();
    return prompt;
}

std::string_view to_string(ParseErrorKind kind) noexcept {
    switch (kind) {
        case ParseErrorKind::MissingMbs: return "missing-mbs";
        case ParseErrorKind::DuplicateMbs: return "duplicate-mbs";
        case ParseErrorKind::UnexpectedMbs: return "unexpected-mbs";
        case ParseErrorKind::WrongArity: return "wrong-arity";
        case ParseErrorKind::NonNumeric: return "non-numeric";
        case ParseErrorKind::NegativeValue: return "negative-value";
        case ParseErrorKind::RowSumOutOfTolerance: return "row-sum-out-of-tolerance";
    }
    return "unknown";
}

ParseResult parse_guidance(std::string_view raw_text, std::size_t num_mbs, std::size_t num_sbs) {
    // Tolerates markdown emphasis around the label, e.g. "**MBS1:** [...]".
    static const std::regex row_pattern(R"(MBS[ \t]*(\d+)[ \t*]*:[ \t*]*\[([^\[\]]*)\])");
    const std::string text(raw_text);
    std::map<std::size_t, std::vector<double>> rows;

    for (auto it = std::sregex_iterator(text.begin(), text.end(), row_pattern); it != std::sregex_iterator(); ++it) {
        const auto& match = *it;
        std::size_t index = 0;
        const std::string index_text = match[1].str();
        const auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (ec != std::errc() || index == 0 || index > num_mbs) {
            return ParseError{ParseErrorKind::UnexpectedMbs, 0, "MBS index " + index_text + " is out of range"};
        }
        if (rows.contains(index)) {
            return ParseError{ParseErrorKind::DuplicateMbs, index, "more than one line for MBS" + index_text};
        }

        std::vector<std::string> tokens;
        std::string body = match[2].str();
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            tokens.push_back(trim(std::string_view(body).substr(start, comma == std::string::npos ? std::string::npos
                                                                                                   : comma - start)));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (tokens.size() != num_sbs) {
            return ParseError{ParseErrorKind::WrongArity, index,
                              "expected " + std::to_string(num_sbs) + " values, found " + std::to_string(tokens.size())};
        }
        std::vector<double> values;
        for (const auto& token : tokens) {
            double v = 0.0;
            const char* first = token.data();
            if (!token.empty() && token.front() == '+') {
                ++first;
            }
            const auto [end, err] = std::from_chars(first, token.data() + token.size(), v);
            if (token.empty() || err != std::errc() || end != token.data() + token.size() || !std::isfinite(v)) {
                return ParseError{ParseErrorKind::NonNumeric, index, "token '" + token + "' is not a number"};
            }
            if (v < 0.0) {
                return ParseError{ParseErrorKind::NegativeValue, index, "token '" + token + "' is negative"};
            }
            values.push_back(v);
        }
        rows.emplace(index, std::move(values));
    }

    std::vector<double> flat;
    flat.reserve(num_mbs * num_sbs);
    for (std::size_t m = 1; m <= num_mbs; ++m) {
        auto it = rows.find(m);
        if (it == rows.end()) {
            return ParseError{ParseErrorKind::MissingMbs, m, "no line for MBS" + std::to_string(m)};
        }
        std::vector<double>& row = it->second;
        double sum = 0.0;
        for (double v : row) {
            sum += v;
        }
        if (sum < kRowSumLow || sum > kRowSumHigh) {
            return ParseError{ParseErrorKind::RowSumOutOfTolerance, m, "row sums to " + shortest(sum)};
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            for (double& v : row) {
                v /= sum;
            }
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return GuidancePolicy(num_mbs, num_sbs, std::move(flat));
}

std::string serialize_policy(const GuidancePolicy& policy) {
    std::string out;
    for (std::size_t m = 0; m < policy.num_mbs(); ++m) {
        out += "MBS" + std::to_string(m + 1) + ": [";
        const auto row = policy.row(m);
        for (std::size_t n = 0; n < row.size(); ++n) {
            out += (n == 0 ? "" : ", ") + shortest(row[n]);
        }
        out += "]\n";
    }
    return out;
}

std::string_view to_string(RequestErrorKind kind) noexcept {
    switch (kind) {
        case RequestErrorKind::Timeout: return "timeout";
        case RequestErrorKind::Transport: return "transport";
        case RequestErrorKind::HttpStatus: return "http-status";
        case RequestErrorKind::EmptyCompletion: return "empty-completion";
        case RequestErrorKind::MalformedResponse: return "malformed-response";
    }
    return "unknown";
}

std::string_view to_string(GuidanceStage stage) noexcept {
    switch (stage) {
        case GuidanceStage::None: return "ok";
        case GuidanceStage::Validation: return "validation";
        case GuidanceStage::Request: return "request";
        case GuidanceStage::Parse: return "parse";
    }
    return "unknown";
}

GuidancePolicy heuristic_guidance(const GuidanceInput& input) {
    std::vector<double> flat;
    flat.reserve(input.num_mbs * input.num_sbs);
    for (std::size_t m = 0; m < input.num_mbs; ++m) {
        std::vector<double> weights(input.num_sbs);
        for (std::size_t n = 0; n < input.num_sbs; ++n) {
            const SbsGuidanceInput& entry = input.at(m, n);
            double interference = 0.0;
            for (const auto& term : entry.interference) {
                interference += term.avg_gain;
            }
            const double users = static_cast<double>(std::max<std::int64_t>(entry.connected_users, 0));
            weights[n] = users * std::sqrt(entry.avg_channel_gain / (kHeuristicEpsilon + interference));
        }
        const auto row = project_to_simplex(weights);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return GuidancePolicy(input.num_mbs, input.num_sbs, std::move(flat));
}

CompletionResult HeuristicProvider::complete(const GuidanceRequest& request) {
    return serialize_policy(heuristic_guidance(request.input));
}

GuidanceOutcome guidance_with_fallback(const GuidanceInput& input, const NetworkConfig& config,
                                       GuidanceProvider& provider) {
    GuidanceOutcome outcome;
    const std::size_t M = config.num_mbs;
    const std::size_t N = config.num_sbs_per_mbs;
    auto fall_back = [&](GuidanceStage stage, std::string detail) {
        outcome.policy = GuidancePolicy::uniform(M, N);
        outcome.fallback_used = true;
        outcome.failed_stage = stage;
        outcome.detail = std::move(detail);
        return outcome;
    };

    if (input.num_mbs != M || input.num_sbs != N) {
        return fall_back(GuidanceStage::Validation, "input shape does not match the network");
    }
    const ValidationResult validation = validate_input(input);
    if (!validation.accepted()) {
        std::string detail;
        for (const auto& issue : validation.violations) {
            detail += (detail.empty() ? "" : "; ") + issue.field + " " + issue.constraint;
        }
        return fall_back(GuidanceStage::Validation, detail);
    }

    const Prompt prompt = build_prompt(input, config);
    outcome.prompt_text = prompt.text();
    CompletionResult completion;
    try {
        completion = provider.complete(GuidanceRequest{input, prompt});
    } catch (const std::exception& e) {
        return fall_back(GuidanceStage::Request, std::string("provider threw: ") + e.what());
    }
    if (const auto* error = std::get_if<RequestError>(&completion)) {
        return fall_back(GuidanceStage::Request, std::string(to_string(error->kind)) + ": " + error->message);
    }
    outcome.raw_response = std::get<std::string>(completion);

    ParseResult parsed = parse_guidance(outcome.raw_response, M, N);
    if (const auto* error = std::get_if<ParseError>(&parsed)) {
        return fall_back(GuidanceStage::Parse, std::string(to_string(error->kind)) + ": " + error->detail);
    }
    outcome.policy = std::get<GuidancePolicy>(std::move(parsed));
    return outcome;
}

std::uint64_t fnv1a_64(std::string_view text) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

GuidanceAuditLog::GuidanceAuditLog(std::ostream& out) : out_(&out) {}

void GuidanceAuditLog::record(const GuidanceOutcome& outcome) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a_64(outcome.prompt_text)));

    nlohmann::json record = {
        {"timestamp", stamp},
        {"prompt_hash", hash},
        {"raw_response", outcome.raw_response},
        {"parse_outcome", outcome.fallback_used
                              ? std::string(to_string(outcome.failed_stage)) + ": " + outcome.detail
                              : std::string("ok")},
        {"fallback", outcome.fallback_used},
    };
    *out_ << record.dump() << '\n';
}

}  // namespace hric
