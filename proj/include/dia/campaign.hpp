#pragma once

#include "dia/dia_builders.hpp"
#include "dia/endpoints.hpp"
#include "dia/errors.hpp"
#include "dia/rewrite.hpp"
#include "dia/sdgm.hpp"
#include "dia/template_inference.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dia {

// (prompt, response) safety judge. Backed by a guard-model endpoint in
// production, by scripts in tests.
class GuardClient {
  public:
    virtual ~GuardClient() = default;
    virtual GuardVerdict classify(const std::string& prompt, const std::string& response) = 0;
};

class HttpGuard : public GuardClient {
  public:
    explicit HttpGuard(HttpClient& client) : client_(client) {}
    GuardVerdict classify(const std::string& prompt, const std::string& response) override {
        return dia::classify(client_, prompt, response);
    }

  private:
    HttpClient& client_;
};

// The built-in refusal phrase list (also available as an editable asset
// file, one phrase per line; see load_refusal_phrases).
std::vector<std::string> default_refusal_phrases();

// Loads one phrase per line; blank lines and lines starting with '#' are
// skipped. Throws FormatError when unreadable or empty.
std::vector<std::string> load_refusal_phrases(const std::string& path);

// How one iteration's response was judged.
struct JudgeResult {
    bool success = false;
    bool heuristic = false; // no guard available; not-refused heuristic used
    bool refusal = false;   // a refusal phrase occurs in the response
    std::optional<GuardVerdict> verdict;
};

// Guard path: success iff the verdict is unsafe. No guard: success iff no
// refusal phrase appears (flagged heuristic). The refusal flag is computed
// either way. GuardParseFailure propagates; a verdict is never invented.
JudgeResult judge_response(const std::string& prompt, const std::string& response,
                           GuardClient* guard, const std::vector<std::string>& refusal_phrases);

// One attack iteration as persisted: one JSON line per record.
struct AttackRecord {
    std::string prompt_id;
    int iteration = 1;      // 1-based
    std::string prompt;     // the (possibly rewritten) prompt this iteration used
    std::string dialogue_digest; // content hash; empty when the dialogue never built
    std::string payload_mode;
    std::string response;
    JudgeResult judge;
    std::string error;      // non-empty when this iteration failed with an error
    std::string ts_start;   // ISO-8601 UTC; excluded from determinism checks
    std::string ts_end;
};

std::string record_to_json_line(const AttackRecord& r);
AttackRecord record_from_json_line(const std::string& line); // throws FormatError
std::vector<AttackRecord> load_records(const std::string& path);

// Stable content hash tying a record to the exact dialogue inputs, so any
// record can be re-derived and audited later.
std::string dialogue_digest(DiaVariant variant, const std::string& prompt,
                            const KeywordMapping& mapping, const DiaConfig& config);

struct DatasetEntry {
    std::string id;
    std::string prompt;
};

// Accepts either line-delimited JSON objects (prompt under "instruction",
// "goal" or "prompt"; optional "id") or CSV with a header naming one of
// those columns (optional "id" column). Row index becomes the id when none
// is provided. Throws FormatError naming the expected columns.
std::vector<DatasetEntry> ingest_dataset(const std::string& path);

// Everything a campaign talks to. The guard is optional; without one the
// judge falls back to the refusal heuristic.
struct CampaignClients {
    ChatEndpoint& victim;
    AuxiliaryClient& aux;
    EmbeddingClient& embedder;
    GuardClient* guard = nullptr;
};

struct CampaignConfig {
    DiaConfig dia;
    ChatTemplate victim_template;  // payload rendering target
    int budget = 1;                // queries per prompt, >= 1
    uint64_t seed = 0;
    std::string out_path;          // records file; empty = in-memory only
    int concurrency = 1;           // worker pool width over prompts
    std::string payload_mode = "webui_single_string";
    std::vector<std::string> refusal_phrases = default_refusal_phrases();
    BenignPool pool;               // demonstration source (variant II)
    bool resume = false;           // skip prompts already complete in out_path

    void validate() const; // throws FormatError
};

// Runs the full multi-query loop for one prompt: iteration 1 uses the
// prompt verbatim; every later iteration rewrites the *original* prompt
// with a fresh strategy and rebuilds the dialogue from scratch. Stops at
// the first success or when the budget is spent. Endpoint, auxiliary and
// guard errors are recorded on their iteration and the loop continues.
std::vector<AttackRecord> run_attack(const CampaignConfig& cfg, const CampaignClients& clients,
                                     const std::string& prompt_id, const std::string& prompt,
                                     Rng& rng);

// Worker pool over dataset entries (iterations within a prompt stay
// sequential). Each prompt's RNG is seeded seed + its dataset index, so
// results are identical no matter the concurrency. Records are appended to
// out_path batch-by-batch in dataset order as prompts complete; with
// resume=true, prompts already complete in the file are not re-run.
std::vector<AttackRecord> run_campaign(const CampaignConfig& cfg, const CampaignClients& clients,
                                       const std::vector<DatasetEntry>& dataset);

// Fraction of prompts with a successful iteration <= at_iteration (all
// iterations when nullopt). Throws EmptyDataset on no records.
double compute_asr(const std::vector<AttackRecord>& records,
                   std::optional<int> at_iteration = std::nullopt);

// Fraction of successful prompts whose annotation says the defense passed.
// Every successful id must be annotated (MissingAnnotation lists gaps);
// an empty successful set yields 0.0 by convention.
double compute_dpr(const std::set<std::string>& successful_prompt_ids,
                   const std::map<std::string, bool>& defense_outcomes);

struct Report {
    std::map<std::string, std::optional<int>> success_iteration; // per prompt
    double asr = 0.0;
    std::vector<double> asr_by_iteration; // index k-1 = ASR at iteration <= k
    std::optional<double> dpr;
    bool heuristic_judging = false; // any record judged without a guard
};

Report build_report(const std::vector<AttackRecord>& records,
                    const std::optional<std::map<std::string, bool>>& defense_outcomes =
                        std::nullopt);

std::string report_to_text(const Report& report);

} // namespace dia
