#include "dia/sdgm.hpp"

#include "dia/util.hpp"

#include "json.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>

namespace dia {
namespace {

using nlohmann::json;

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

void normalize(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 == 0.0) {
        if (!v.empty()) v[0] = 1.0;
        return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::string sidecar_path(const std::string& pool_path) {
    return pool_path + ".embeddings.json";
}

} // namespace

std::vector<double> HashEmbedder::embed(const std::string& text) {
    std::vector<double> acc(dim_, 0.0);
    for (const std::string& word : words_of(text)) {
        Rng rng(fnv1a64(word));
        for (double& x : acc) x += rng.next_double() * 2.0 - 1.0;
    }
    normalize(acc);
    return acc;
}

void BenignPool::validate() const {
    if (prompts.empty()) throw FormatError("benign pool: no prompts");
    if (prompts.size() != embeddings.size())
        throw FormatError("benign pool: prompt/embedding count mismatch");
    const size_t dim = embeddings.front().size();
    for (size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].size() != dim)
            throw FormatError("benign pool: embedding " + std::to_string(i) +
                              " has dimension " + std::to_string(embeddings[i].size()) +
                              ", expected " + std::to_string(dim));
        if (std::fabs(dot(embeddings[i], embeddings[i]) - 1.0) > 2e-6)
            throw FormatError("benign pool: embedding " + std::to_string(i) +
                              " is not unit-norm");
    }
}

BenignPool BenignPool::load(const std::string& path, EmbeddingClient& embedder) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("benign pool '" + path + "': " + e.what());
    }
    if (!doc.is_array()) throw FormatError("benign pool '" + path + "': expected a JSON array");

    BenignPool pool;
    std::vector<bool> have;
    for (size_t i = 0; i < doc.size(); ++i) {
        const json& entry = doc[i];
        if (entry.is_string()) {
            pool.prompts.push_back(entry.get<std::string>());
            pool.embeddings.emplace_back();
            have.push_back(false);
        } else if (entry.is_object() && entry.contains("prompt") && entry["prompt"].is_string()) {
            pool.prompts.push_back(entry["prompt"].get<std::string>());
            if (entry.contains("embedding")) {
                pool.embeddings.push_back(entry["embedding"].get<std::vector<double>>());
                have.push_back(true);
            } else {
                pool.embeddings.emplace_back();
                have.push_back(false);
            }
        } else {
            throw FormatError("benign pool '" + path + "': entry " + std::to_string(i) +
                              " must be a string or an object with a 'prompt' field");
        }
    }
    if (pool.prompts.empty()) throw FormatError("benign pool '" + path + "': no prompts");

    // Reuse the sidecar cache when it matches the prompt list exactly.
    bool cache_valid = false;
    const std::string side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        try {
            json cache = json::parse(read_file(side));
            if (cache["prompts"].get<std::vector<std::string>>() == pool.prompts) {
                auto vecs = cache["embeddings"].get<std::vector<std::vector<double>>>();
                if (vecs.size() == pool.prompts.size()) {
                    pool.embeddings = std::move(vecs);
                    cache_valid = true;
                }
            }
        } catch (const std::exception&) {
            cache_valid = false; // stale or corrupt cache: recompute below
        }
    }

    bool computed = false;
    if (!cache_valid) {
        for (size_t i = 0; i < pool.prompts.size(); ++i) {
            if (have[i] && !pool.embeddings[i].empty()) continue;
            pool.embeddings[i] = embedder.embed(pool.prompts[i]);
            computed = true;
        }
    }
    pool.validate();

    if (computed) {
        try {
            json cache;
            cache["prompts"] = pool.prompts;
            cache["embeddings"] = pool.embeddings;
            write_file(side, cache.dump());
        } catch (const std::exception&) {
            // read-only pool location; caching is best-effort
        }
    }
    return pool;
}

SelectResult select_similar(const BenignPool& pool, const std::string& query,
                            EmbeddingClient& embedder) {
    pool.validate();
    const std::vector<double> q = embedder.embed(query);
    if (q.size() != pool.embeddings.front().size())
        throw DimensionMismatch("query embedding has dimension " + std::to_string(q.size()) +
                                ", pool has " + std::to_string(pool.embeddings.front().size()));
    SelectResult best;
    best.score = dot(q, pool.embeddings[0]);
    for (size_t i = 1; i < pool.prompts.size(); ++i) {
        const double s = dot(q, pool.embeddings[i]);
        if (s > best.score) {
            best.score = s;
            best.index = i;
        }
    }
    best.prompt = pool.prompts[best.index];
    return best;
}

Demonstration build_demonstration(AuxiliaryClient& aux, const std::string& benign_prompt,
                                  const PromptAssets& assets) {
    Demonstration demo;
    demo.prompt = benign_prompt;
    demo.mapping = extract_keywords(aux, benign_prompt, assets);
    demo.sanitized = sanitize_text(benign_prompt, demo.mapping);

    demo.answer = aux.query(benign_prompt);
    if (contains_refusal_marker(demo.answer))
        throw AuxRefusal("auxiliary declined to answer the benign demo prompt");
    if (trim(demo.answer).empty())
        throw AuxParseFailure("build_demonstration: empty answer from auxiliary");

    if (demo.mapping.empty()) {
        demo.degenerate = true;
        demo.rendered = "Answer: " + demo.answer;
        return demo;
    }

    // One step per pair, restoring alternatives to the original words and
    // showing the sentence after each step.
    std::string text;
    std::vector<KeywordPair> restored;
    for (size_t i = 0; i < demo.mapping.size(); ++i) {
        const KeywordPair& p = demo.mapping.pairs()[i];
        restored.push_back(p);
        const KeywordMapping partial = KeywordMapping::build(restored);
        text += "Step " + std::to_string(i + 1) + ": replace \"" + p.alternative +
                "\" with \"" + p.keyword + "\".\n";
        text += "Sentence: " + restore_text(demo.sanitized, partial) + "\n";
    }
    text += "Answer: " + demo.answer;
    demo.rendered = std::move(text);
    return demo;
}

} // namespace dia
