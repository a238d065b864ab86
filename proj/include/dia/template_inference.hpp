#pragma once

#include "dia/chat_template.hpp"
#include "dia/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dia {

// Minimal surface the probing attack needs from a target: submit one user
// message, receive the assistant's reply. Implementations must be safe for
// concurrent calls if used with a concurrency degree above 1.
class ChatEndpoint {
  public:
    virtual ~ChatEndpoint() = default;
    virtual std::string send_user(const std::string& text) = 0;
};

// Placeholder texts woven into a probe. Must not contain marker substrings
// of either probed template, or the leak detection would misfire.
struct ProbeSpec {
    std::string user_placeholder = "user text placeholder";
    std::string assistant_placeholder = "assistant text placeholder";
    std::string repeat_cmd = "Please repeat your previous response.";
};

// True when a pairing probes a template against itself; the probe is still
// well-formed (doubled markers) but cannot discriminate anything.
bool degenerate_pairing(const ChatTemplate& t_i, const ChatTemplate& t_j);

// Builds the discriminating probe for candidate templates t_i and t_j:
//   user_ph + S_u(i) P_a(i) + S_u(j) P_a(j) + assistant_ph
//           + S_a(i) P_u(i) + S_a(j) P_u(j) + repeat_cmd
// Whichever candidate matches the target's real template, its markers act
// as live turn boundaries while the other candidate's markers are inert
// text that ends up *inside* a fake assistant turn; asking the target to
// repeat that turn leaks the inert markers verbatim. Throws FormatError if
// a spec field contains a marker of either template.
std::string build_probe(const ChatTemplate& t_i, const ChatTemplate& t_j,
                        const ProbeSpec& spec = {});

enum class TemplateDecision { template_i, template_j, unknown };

const char* decision_name(TemplateDecision d);

// Applies the leak rule to a raw response, using exact substring matches of
// whole marker concatenations (single markers alone would false-positive on
// partial echoes):
//   contains S_u(j)+P_a(j) and not S_a(i)+P_u(i)  ->  template_i
//   contains S_a(i)+P_u(i) and not S_u(j)+P_a(j)  ->  template_j
//   anything else                                 ->  unknown
TemplateDecision infer_decision(const ChatTemplate& t_i, const ChatTemplate& t_j,
                                const std::string& response);

struct ProbeExchange {
    std::string probe;
    std::string response;
};

struct InferenceOutcome {
    TemplateDecision decision = TemplateDecision::unknown;
    int tries_used = 0;
    std::vector<ProbeExchange> transcripts; // one entry per query, in order
};

// Thrown when the endpoint fails mid-run; carries whatever transcripts were
// collected before the failure.
struct TiaEndpointError : EndpointError {
    InferenceOutcome partial;
    TiaEndpointError(const std::string& what_, InferenceOutcome partial_)
        : EndpointError(what_), partial(std::move(partial_)) {}
};

// Probes the endpoint up to n_tmax times with the (t_i, t_j) probe; if all
// come back unknown, swaps the pairing and tries up to n_tmax more times
// (some targets mangle one orientation but not the other). Decisions from
// the swapped phase are mapped back to the original orientation. tries_used
// counts every query and never exceeds 2 * n_tmax.
InferenceOutcome run_tia(ChatEndpoint& endpoint, const ChatTemplate& t_i,
                         const ChatTemplate& t_j, int n_tmax, const ProbeSpec& spec = {});

struct PairingRecord {
    std::string left;
    std::string right;
    TemplateDecision decision = TemplateDecision::unknown;
    int tries_used = 0;
};

struct IdentifyResult {
    std::optional<ChatTemplate> winner;
    std::vector<PairingRecord> pairings;
    int total_queries = 0;
};

// Single-elimination bracket over the registry: each round pairs survivors
// in order, losers drop out, an odd survivor gets a bye; an unknown pairing
// advances the earlier-listed candidate, except in the final pairing where
// unknown makes the whole identification unknown. A single-entry registry
// is returned as-is without queries; an empty registry is a FormatError.
// Pairings within a round may run concurrently (concurrency > 1).
IdentifyResult identify_template(ChatEndpoint& endpoint,
                                 const std::vector<ChatTemplate>& registry, int n_tmax,
                                 const ProbeSpec& spec = {}, int concurrency = 1);

} // namespace dia
