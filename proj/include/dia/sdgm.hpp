#pragma once

#include "dia/abgm.hpp"
#include "dia/errors.hpp"
#include "dia/keyword_mapping.hpp"
#include "dia/prompt_assets.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace dia {

// Produces one embedding per text. Backends: a remote service, or the local
// deterministic stub below.
class EmbeddingClient {
  public:
    virtual ~EmbeddingClient() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Dependency-free embedder: the unit-normalized sum of per-word vectors,
// each word's vector drawn from an RNG seeded by the word's hash. Identical
// texts embed identically and word overlap raises cosine similarity, which
// is all the pool selection needs.
class HashEmbedder : public EmbeddingClient {
  public:
    explicit HashEmbedder(size_t dim = 32) : dim_(dim) {}
    std::vector<double> embed(const std::string& text) override;
    size_t dim() const { return dim_; }

  private:
    size_t dim_;
};

// Benign prompts with precomputed unit-norm embeddings. Loading computes
// any missing embeddings and persists them in a sidecar file
// (<pool>.embeddings.json) so later loads skip the embedder.
struct BenignPool {
    std::vector<std::string> prompts;
    std::vector<std::vector<double>> embeddings;

    // `path` holds a JSON array of strings or {"prompt", "embedding"?}
    // objects. Throws FormatError on malformed files, empty pools, or
    // non-unit embeddings; sidecar write failures are ignored.
    static BenignPool load(const std::string& path, EmbeddingClient& embedder);

    void validate() const; // size match + unit norms
};

struct SelectResult {
    size_t index = 0;
    std::string prompt;
    double score = 0.0;
};

// Embeds `query` and returns the pool entry with the highest dot product
// (ties resolved to the lowest index). Throws DimensionMismatch when the
// query embedding's dimension differs from the pool's.
SelectResult select_similar(const BenignPool& pool, const std::string& query,
                            EmbeddingClient& embedder);

// A worked word-substitution example shown to the target before the real
// task: the sanitized benign sentence, one restoration step per pair, then
// a full answer to the restored sentence.
struct Demonstration {
    std::string prompt;    // original benign prompt
    std::string sanitized; // alternatives substituted in
    KeywordMapping mapping;
    std::string answer;   // auxiliary's complete answer to `prompt`
    std::string rendered; // the demo's forged assistant text
    bool degenerate = false; // no keywords extracted; rendered is answer-only
};

// Builds the demonstration with the auxiliary model: extract a mapping from
// the benign prompt, fetch a full answer, and render the step-by-step
// restoration. Throws AuxRefusal / AuxParseFailure from the auxiliary calls.
Demonstration build_demonstration(AuxiliaryClient& aux, const std::string& benign_prompt,
                                  const PromptAssets& assets);

} // namespace dia
