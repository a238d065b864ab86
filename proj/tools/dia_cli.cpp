#include "dia/campaign.hpp"
#include "dia/sim_server.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

using namespace dia;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// exit codes: 0 ok, 1 unexpected, 2 config, 3 endpoint failure, 4 dataset
constexpr int kOk = 0;
constexpr int kUnexpected = 1;
constexpr int kConfigError = 2;
constexpr int kEndpointError = 3;
constexpr int kDatasetError = 4;

int fail(int code, const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return code;
}

std::string default_asset(const std::string& rel) {
    return std::string(DIA_DEFAULT_ASSET_DIR) + "/" + rel;
}

ChatTemplate required_template(const std::string& registry_path, const std::string& name) {
    const std::vector<ChatTemplate> registry = load_templates(registry_path);
    auto t = find_template(registry, name);
    if (!t) {
        std::string known;
        for (const ChatTemplate& c : registry) known += (known.empty() ? "" : ", ") + c.name;
        throw FormatError("template '" + name + "' not in registry (known: " + known + ")");
    }
    return *t;
}

std::map<std::string, bool> load_annotations(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("annotations file '" + path + "': " + e.what());
    }
    if (!doc.is_object())
        throw FormatError("annotations file '" + path +
                          "': expected an object of prompt_id -> passed flag");
    std::map<std::string, bool> out;
    for (const auto& [id, value] : doc.items()) {
        if (!value.is_boolean())
            throw FormatError("annotations file '" + path + "': '" + id + "' is not a boolean");
        out[id] = value.get<bool>();
    }
    return out;
}

struct AttackArgs {
    std::string dataset;
    std::string variant = "dia1";
    int budget = 1;
    uint64_t seed = 0;
    std::string endpoints;
    std::string out = "results.jsonl";
    std::string registry = default_asset("templates.json");
    std::string template_name;
    std::string victim_name = "victim";
    std::string aux_name = "auxiliary";
    std::string guard_name;
    std::string pool = default_asset("benign_pool.json");
    std::string assets_dir;
    std::string refusal_phrases;
    std::vector<std::string> ablate;
    std::string continue_cmd = "Please continue.";
    int concurrency = 1;
    bool resume = false;
};

int cmd_attack(const AttackArgs& args) {
    CampaignConfig cfg;
    std::vector<EndpointConfig> endpoints;
    try {
        cfg.dia.variant = variant_from_name(args.variant);
        cfg.dia.continue_cmd = args.continue_cmd;
        for (const std::string& component : args.ablate) {
            if (component == "system") cfg.dia.include_system = false;
            else if (component == "hypnosis") cfg.dia.include_hypnosis = false;
            else if (component == "guidance") cfg.dia.include_guidance = false;
            else
                return fail(kConfigError, "unknown ablation '" + component +
                                              "' (expected system, hypnosis, guidance)");
        }
        if (!args.assets_dir.empty()) cfg.dia.assets = PromptAssets::load(args.assets_dir);
        cfg.victim_template = required_template(args.registry, args.template_name);
        cfg.budget = args.budget;
        cfg.seed = args.seed;
        cfg.out_path = args.out;
        cfg.concurrency = args.concurrency;
        cfg.resume = args.resume;
        if (!args.refusal_phrases.empty())
            cfg.refusal_phrases = load_refusal_phrases(args.refusal_phrases);
        endpoints = load_endpoints(args.endpoints);
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }

    std::vector<DatasetEntry> dataset;
    try {
        dataset = ingest_dataset(args.dataset);
        if (dataset.empty()) throw EmptyDataset("dataset '" + args.dataset + "' has no prompts");
    } catch (const Error& e) {
        return fail(kDatasetError, e.what());
    }

    try {
        HttpClient victim_http(find_endpoint(endpoints, args.victim_name));
        HttpClient aux_http(find_endpoint(endpoints, args.aux_name));
        cfg.payload_mode = mode_name(victim_http.config().mode);

        std::unique_ptr<HttpClient> guard_http;
        std::unique_ptr<HttpGuard> guard;
        if (!args.guard_name.empty()) {
            guard_http = std::make_unique<HttpClient>(find_endpoint(endpoints, args.guard_name));
            guard = std::make_unique<HttpGuard>(*guard_http);
        }

        HashEmbedder embedder;
        if (cfg.dia.variant == DiaVariant::dia2) cfg.pool = BenignPool::load(args.pool, embedder);

        HttpChatEndpoint victim(victim_http);
        HttpAuxiliary aux(aux_http);
        CampaignClients clients{victim, aux, embedder, guard.get()};

        const std::vector<AttackRecord> records = run_campaign(cfg, clients, dataset);
        std::cout << report_to_text(build_report(records));
        std::cout << "records: " << cfg.out_path << "\n";
        return kOk;
    } catch (const EndpointError& e) {
        return fail(kEndpointError, e.what());
    } catch (const EmptyDataset& e) {
        return fail(kDatasetError, e.what());
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }
}

struct TiaArgs {
    std::string registry = default_asset("templates.json");
    std::string endpoints;
    std::string endpoint_name = "victim";
    int max_tries = 3;
    bool as_json = false;
};

int cmd_tia(const TiaArgs& args) {
    std::vector<ChatTemplate> registry;
    std::vector<EndpointConfig> endpoints;
    try {
        registry = load_templates(args.registry);
        endpoints = load_endpoints(args.endpoints);
        if (args.max_tries < 1) throw FormatError("--max-tries must be >= 1");
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }

    // Drop templates whose markers collide with the probe placeholder texts
    // (e.g. a bare-space marker): they cannot be probed by marker echo.
    std::vector<ChatTemplate> usable;
    for (const ChatTemplate& t : registry) {
        try {
            build_probe(t, t);
            usable.push_back(t);
        } catch (const FormatError& e) {
            std::cerr << "note: skipping template '" << t.name << "': " << e.what() << "\n";
        }
    }
    if (usable.empty())
        return fail(kConfigError, "no probe-compatible templates in the registry");

    try {
        HttpClient http(find_endpoint(endpoints, args.endpoint_name));
        HttpChatEndpoint endpoint(http);
        const IdentifyResult result = identify_template(endpoint, usable, args.max_tries);

        if (args.as_json) {
            ordered_json j;
            j["winner"] = result.winner ? json(result.winner->name) : json(nullptr);
            j["total_queries"] = result.total_queries;
            j["pairings"] = json::array();
            for (const PairingRecord& p : result.pairings)
                j["pairings"].push_back({{"left", p.left},
                                         {"right", p.right},
                                         {"decision", decision_name(p.decision)},
                                         {"tries_used", p.tries_used}});
            std::cout << j.dump(2) << "\n";
        } else {
            for (const PairingRecord& p : result.pairings)
                std::cout << p.left << " vs " << p.right << " -> " << decision_name(p.decision)
                          << " (" << p.tries_used << " queries)\n";
            std::cout << "queries: " << result.total_queries << "\n";
            std::cout << "template: " << (result.winner ? result.winner->name : "unknown") << "\n";
        }
        return result.winner ? kOk : kEndpointError;
    } catch (const FormatError& e) {
        return fail(kConfigError, e.what());
    } catch (const EndpointError& e) {
        return fail(kEndpointError, e.what());
    }
}

struct AbgmExportArgs {
    std::string dataset;
    std::string endpoints;
    std::string aux_name = "auxiliary";
    std::string out = "beginnings.jsonl";
    std::string assets_dir;
};

int cmd_abgm_export(const AbgmExportArgs& args) {
    PromptAssets assets = PromptAssets::defaults();
    std::vector<EndpointConfig> endpoints;
    try {
        if (!args.assets_dir.empty()) assets = PromptAssets::load(args.assets_dir);
        endpoints = load_endpoints(args.endpoints);
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }

    std::vector<DatasetEntry> dataset;
    try {
        dataset = ingest_dataset(args.dataset);
        if (dataset.empty()) throw EmptyDataset("dataset '" + args.dataset + "' has no prompts");
    } catch (const Error& e) {
        return fail(kDatasetError, e.what());
    }

    std::ofstream out(args.out, std::ios::trunc);
    if (!out) return fail(kConfigError, "cannot open output file '" + args.out + "'");

    try {
        HttpClient aux_http(find_endpoint(endpoints, args.aux_name));
        HttpAuxiliary aux(aux_http);
        size_t generated = 0;
        for (const DatasetEntry& entry : dataset) {
            try {
                const BeginningResult result = run_abgm(aux, entry.prompt, assets);
                out << beginning_record_line(entry.prompt, result.mapping, result.beginning)
                    << "\n";
                ++generated;
            } catch (const AuxRefusal& e) {
                out << ordered_json{{"prompt", entry.prompt}, {"error", e.what()}}.dump() << "\n";
            } catch (const AuxParseFailure& e) {
                out << ordered_json{{"prompt", entry.prompt}, {"error", e.what()}}.dump() << "\n";
            }
            out.flush();
        }
        std::cout << "generated " << generated << "/" << dataset.size() << " beginnings -> "
                  << args.out << "\n";
        return kOk;
    } catch (const EndpointError& e) {
        return fail(kEndpointError, e.what());
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }
}

struct ReportArgs {
    std::string in;
    std::string annotations;
    int at_iteration = 0; // 0 = no cutoff
};

int cmd_report(const ReportArgs& args) {
    try {
        const std::vector<AttackRecord> records = load_records(args.in);
        std::optional<std::map<std::string, bool>> outcomes;
        if (!args.annotations.empty()) outcomes = load_annotations(args.annotations);

        Report report = build_report(records, outcomes);
        std::cout << report_to_text(report);
        if (args.at_iteration > 0)
            std::cout << "asr at iteration <= " << args.at_iteration << ": "
                      << compute_asr(records, args.at_iteration) << "\n";
        return kOk;
    } catch (const MissingAnnotation& e) {
        return fail(kDatasetError, e.what());
    } catch (const EmptyDataset& e) {
        return fail(kDatasetError, e.what());
    } catch (const Error& e) {
        return fail(kDatasetError, e.what());
    }
}

struct ServeArgs {
    std::string registry = default_asset("templates.json");
    std::string template_name;
    int port = 0;
    double compliance = 0.5;
    uint64_t seed = 0;
    std::string scripted;
    std::string refusals;
};

int cmd_simulate_serve(const ServeArgs& args) {
    SimulatedLLMConfig cfg;
    try {
        cfg.true_template = required_template(args.registry, args.template_name);
        cfg.repeat_compliance = args.compliance;
        cfg.seed = args.seed;
        if (!args.scripted.empty()) {
            for (const std::string& line : split_lines(read_file(args.scripted)))
                if (!line.empty()) cfg.scripted_responses.push_back(line);
        }
        if (!args.refusals.empty()) cfg.refusal_lexicon = load_refusal_phrases(args.refusals);
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    }

    try {
        SimServer server(cfg, args.port);
        std::cout << "simulated '" << cfg.true_template.name << "' endpoint listening on "
                  << server.base_url() << "\n"
                  << "POST /v1/chat/completions | POST /v1/completions\n";
        for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    } catch (const EndpointError& e) {
        return fail(kEndpointError, e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dialogue-injection red-team toolkit"};
    app.require_subcommand(1);

    AttackArgs attack;
    CLI::App* attack_cmd = app.add_subcommand("attack", "run an attack campaign over a dataset");
    attack_cmd->add_option("--dataset", attack.dataset, "prompt dataset (CSV or JSONL)")
        ->required();
    attack_cmd->add_option("--variant", attack.variant, "dia1 or dia2");
    attack_cmd->add_option("--budget", attack.budget, "queries per prompt")
        ->check(CLI::PositiveNumber);
    attack_cmd->add_option("--seed", attack.seed, "rng seed");
    attack_cmd->add_option("--endpoints", attack.endpoints, "endpoint config JSON")->required();
    attack_cmd->add_option("--out", attack.out, "results JSONL path");
    attack_cmd->add_option("--registry", attack.registry, "chat template registry JSON");
    attack_cmd->add_option("--template", attack.template_name, "victim chat template name")
        ->required();
    attack_cmd->add_option("--victim", attack.victim_name, "victim endpoint name");
    attack_cmd->add_option("--auxiliary", attack.aux_name, "auxiliary endpoint name");
    attack_cmd->add_option("--guard", attack.guard_name, "guard endpoint name (omit = heuristic)");
    attack_cmd->add_option("--pool", attack.pool, "benign pool JSON (variant dia2)");
    attack_cmd->add_option("--assets", attack.assets_dir, "prompt asset override directory");
    attack_cmd->add_option("--refusal-phrases", attack.refusal_phrases,
                           "refusal phrase list (heuristic judge)");
    attack_cmd->add_option("--ablate", attack.ablate,
                           "components to drop: system, hypnosis, guidance")
        ->delimiter(',');
    attack_cmd->add_option("--continue-cmd", attack.continue_cmd, "continue command text");
    attack_cmd->add_option("--concurrency", attack.concurrency, "parallel prompts")
        ->check(CLI::PositiveNumber);
    attack_cmd->add_flag("--resume", attack.resume, "skip prompts already complete in --out");

    TiaArgs tia;
    CLI::App* tia_cmd = app.add_subcommand("tia", "infer a victim's chat template by probing");
    tia_cmd->add_option("--registry", tia.registry, "chat template registry JSON");
    tia_cmd->add_option("--endpoints", tia.endpoints, "endpoint config JSON")->required();
    tia_cmd->add_option("--endpoint", tia.endpoint_name, "endpoint name to probe");
    tia_cmd->add_option("--max-tries", tia.max_tries, "probe repetitions per orientation");
    tia_cmd->add_flag("--json", tia.as_json, "emit JSON instead of text");

    AbgmExportArgs abgm_export;
    CLI::App* abgm_cmd = app.add_subcommand("abgm", "affirmative-beginning utilities");
    CLI::App* export_cmd =
        abgm_cmd->add_subcommand("export", "generate beginnings for a dataset");
    export_cmd->add_option("--dataset", abgm_export.dataset, "prompt dataset (CSV or JSONL)")
        ->required();
    export_cmd->add_option("--endpoints", abgm_export.endpoints, "endpoint config JSON")
        ->required();
    export_cmd->add_option("--auxiliary", abgm_export.aux_name, "auxiliary endpoint name");
    export_cmd->add_option("--out", abgm_export.out, "output JSONL path");
    export_cmd->add_option("--assets", abgm_export.assets_dir, "prompt asset override directory");
    abgm_cmd->require_subcommand(1);

    ReportArgs report;
    CLI::App* report_cmd = app.add_subcommand("report", "recompute metrics from a results file");
    report_cmd->add_option("--in", report.in, "results JSONL path")->required();
    report_cmd->add_option("--defense-annotations", report.annotations,
                           "JSON object prompt_id -> passed flag (enables DPR)");
    report_cmd->add_option("--at", report.at_iteration, "extra cumulative ASR cutoff");

    ServeArgs serve;
    CLI::App* serve_cmd =
        app.add_subcommand("simulate-serve", "serve the deterministic loopback simulator");
    serve_cmd->add_option("--registry", serve.registry, "chat template registry JSON");
    serve_cmd->add_option("--template", serve.template_name, "true template name")->required();
    serve_cmd->add_option("--port", serve.port, "port (0 = auto)");
    serve_cmd->add_option("--compliance", serve.compliance, "repeat-command compliance [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    serve_cmd->add_option("--seed", serve.seed, "rng seed");
    serve_cmd->add_option("--scripted", serve.scripted, "file of scripted responses, one per line");
    serve_cmd->add_option("--refusals", serve.refusals, "refusal trigger list, one per line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (attack_cmd->parsed()) return cmd_attack(attack);
        if (tia_cmd->parsed()) return cmd_tia(tia);
        if (abgm_cmd->parsed() && export_cmd->parsed()) return cmd_abgm_export(abgm_export);
        if (report_cmd->parsed()) return cmd_report(report);
        if (serve_cmd->parsed()) return cmd_simulate_serve(serve);
    } catch (const EndpointError& e) {
        return fail(kEndpointError, e.what());
    } catch (const Error& e) {
        return fail(kConfigError, e.what());
    } catch (const std::exception& e) {
        return fail(kUnexpected, e.what());
    }
    return kConfigError;
}
