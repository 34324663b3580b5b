// fairscope: distribution-level model bias audits with transport-based and
// Shapley bias explanations.
//
// Subcommands: audit, explain, shapley-bias, group-bias, mitigate, synth,
// curves. Exit codes: 0 success, 2 config error, 3 data error, 4 cap
// exceeded.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fairscope/audit.hpp"
#include "fairscope/fairscope.hpp"

namespace fs = std::filesystem;
using fairscope::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    cmd->add_option("--config", args.config_path, "audit config JSON")
        ->required(config_required);
    cmd->add_option("--out", args.out_override, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed_override, "seed (overrides config)");
    cmd->add_flag("--verbose", args.verbose, "chatty progress output");
}

fairscope::AuditConfig load_config(const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) throw fairscope::config_error("cannot open config '" + args.config_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw fairscope::config_error(std::string("config: ") + e.what());
    }
    auto config = fairscope::audit_config_from_json(j);
    if (!args.out_override.empty()) config.output_dir = args.out_override;
    if (args.seed_override >= 0) config.seed = static_cast<std::uint64_t>(args.seed_override);
    return config;
}

// Shared setup for the subcommands that need scores and a model.
struct LoadedAudit {
    fairscope::AuditConfig config;
    fairscope::IngestedDataset data;
    fairscope::ModelSpec model;
    std::vector<double> scores;
    fairscope::GameSpec spec;
};

LoadedAudit load_modeled_audit(const CommonArgs& args) {
    LoadedAudit L;
    L.config = load_config(args);
    if (L.config.model_spec_path.empty())
        throw fairscope::config_error("this subcommand requires model.spec_file");
    L.data = fairscope::ingest_csv(L.config.dataset, L.config);
    std::ifstream in(L.config.model_spec_path);
    if (!in)
        throw fairscope::config_error("cannot open model spec '" + L.config.model_spec_path + "'");
    json mj;
    in >> mj;
    L.model = fairscope::model_spec_from_json(mj);
    L.model.favorable_sign = L.config.favorable_sign;
    L.scores = fairscope::score_rows(L.model, L.data.features);
    L.spec.game = L.config.explainer == fairscope::ExplainerKind::conditional_shapley
                      ? fairscope::GameKind::conditional
                      : fairscope::GameKind::marginal;
    L.spec.background = fairscope::make_background(L.data.features, L.config.background_cap);
    L.spec.knn_k = L.config.knn_k;
    L.spec.standardize = L.config.standardize;
    return L;
}

int run_audit_cmd(const CommonArgs& args) {
    const auto config = load_config(args);
    const auto report = fairscope::run_audit(config);
    if (args.verbose)
        std::cout << fairscope::to_json(report).dump(2) << '\n';
    else
        std::cout << "model bias total=" << report.model_report.total
                  << " positive=" << report.model_report.positive
                  << " negative=" << report.model_report.negative
                  << " net=" << report.model_report.net << '\n';
    std::cout << "report written to " << (fs::path(config.output_dir) / "report.json").string()
              << '\n';
    return 0;
}

int run_explain_cmd(const CommonArgs& args) {
    auto L = load_modeled_audit(args);
    const auto attr = fairscope::attribute_dataset(L.model, L.data.features,
                                                   L.config.explainer, L.spec);
    fs::create_directories(L.config.output_dir);
    const auto path = fs::path(L.config.output_dir) / "attribution.csv";
    fairscope::write_attribution_csv(path.string(), attr, L.data.feature_names);
    std::cout << "attribution written to " << path.string() << '\n';
    return 0;
}

int run_shapley_bias_cmd(const CommonArgs& args) {
    auto L = load_modeled_audit(args);
    const auto table = fairscope::build_bias_game(
        L.model, L.data.features, L.data.protected_class, L.config.favorable_sign,
        fairscope::GroupExplainerForm::shapley_sum, L.spec);
    const auto result = fairscope::shapley_bias(table, L.data.feature_names);
    fs::create_directories(L.config.output_dir);
    fairscope::write_shapley_bias_csv(
        (fs::path(L.config.output_dir) / "shapley_bias.csv").string(), result);
    std::ofstream out(fs::path(L.config.output_dir) / "shapley_bias.json");
    out << fairscope::to_json(result).dump(2) << '\n';
    std::cout << "shapley-bias written to " << L.config.output_dir << '\n';
    return 0;
}

int run_group_bias_cmd(const CommonArgs& args) {
    auto L = load_modeled_audit(args);
    if (L.config.partition.empty())
        throw fairscope::config_error("group-bias requires a partition in the config");
    const auto partition =
        fairscope::detail::resolve_partition(L.config, L.data.feature_names);
    std::vector<std::string> names;
    for (const auto& [name, cols] : L.config.partition) names.push_back(name);
    const auto result = fairscope::group_shapley_bias(
        L.model, L.data.features, L.data.protected_class, L.config.favorable_sign,
        partition, L.spec, names);
    fs::create_directories(L.config.output_dir);
    fairscope::write_shapley_bias_csv(
        (fs::path(L.config.output_dir) / "group_bias.csv").string(), result);
    std::ofstream out(fs::path(L.config.output_dir) / "group_bias.json");
    out << fairscope::to_json(result).dump(2) << '\n';
    std::cout << "group-bias written to " << L.config.output_dir << '\n';
    return 0;
}

int run_mitigate_cmd(const CommonArgs& args) {
    auto L = load_modeled_audit(args);
    const auto trace = fairscope::greedy_mitigation(L.model, L.data.features,
                                                    L.data.protected_class, L.config.explainer,
                                                    L.spec, L.data.feature_names);
    fs::create_directories(L.config.output_dir);
    const auto path = fs::path(L.config.output_dir) / "mitigation.json";
    std::ofstream out(path);
    out << fairscope::to_json(trace).dump(2) << '\n';
    std::cout << "neutralized " << trace.steps.size() << " feature(s); trace written to "
              << path.string() << '\n';
    return 0;
}

int run_curves_cmd(const CommonArgs& args) {
    auto config = load_config(args);
    const auto data = fairscope::ingest_csv(config.dataset, config);
    std::vector<double> scores;
    std::optional<fairscope::AttributionMatrix> attr;
    if (!config.model_spec_path.empty()) {
        std::ifstream in(config.model_spec_path);
        if (!in)
            throw fairscope::config_error("cannot open model spec '" +
                                          config.model_spec_path + "'");
        json mj;
        in >> mj;
        auto model = fairscope::model_spec_from_json(mj);
        model.favorable_sign = config.favorable_sign;
        scores = fairscope::score_rows(model, data.features);
        fairscope::GameSpec spec;
        spec.background = fairscope::make_background(data.features, config.background_cap);
        spec.knn_k = config.knn_k;
        attr = fairscope::attribute_dataset(model, data.features, config.explainer, spec);
    } else if (!config.score_column.empty()) {
        scores = data.scores;
    } else {
        throw fairscope::config_error("curves requires a model spec or score column");
    }
    const auto files = fairscope::emit_curves(scores, data.protected_class,
                                              config.favorable_sign,
                                              attr ? &*attr : nullptr,
                                              data.feature_names, config.output_dir);
    std::cout << files.size() << " curve file(s) written to " << config.output_dir << '\n';
    return 0;
}

struct SynthArgs {
    std::string model_id = "M1";
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    std::string out = "synth_out";
    double mu = 5.0, tau = 1.0, sigma = 1.0, epsilon = 0.1;
};

int run_synth_cmd(const SynthArgs& args) {
    const auto id = fairscope::parse_model_id(args.model_id);
    if (!id) throw fairscope::config_error("unknown synthetic model '" + args.model_id + "'");
    fairscope::SyntheticParams params;
    params.mu = args.mu;
    params.tau = args.tau;
    params.sigma = args.sigma;
    params.epsilon = args.epsilon;
    const auto result = fairscope::generate(*id, params, args.n, args.seed);
    fs::create_directories(args.out);
    fairscope::write_synthetic_csv((fs::path(args.out) / "dataset.csv").string(), result.data);
    json mj = fairscope::model_spec_to_json(result.model);
    std::ofstream out(fs::path(args.out) / "model.json");
    out << mj.dump(2) << '\n';
    std::cout << args.model_id << " dataset (" << args.n << " rows) written to " << args.out
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairscope: Wasserstein model-bias audits and bias explanations"};
    app.require_subcommand(1);

    CommonArgs audit_args, explain_args, shap_args, group_args, mitigate_args, curves_args;
    SynthArgs synth_args;

    add_common(app.add_subcommand("audit", "full bias audit"), audit_args);
    add_common(app.add_subcommand("explain", "attribution matrix only"), explain_args);
    add_common(app.add_subcommand("shapley-bias", "additive Shapley-bias explanations"),
               shap_args);
    add_common(app.add_subcommand("group-bias", "quotient-game bias over feature groups"),
               group_args);
    add_common(app.add_subcommand("mitigate", "greedy neutralization loop"), mitigate_args);
    add_common(app.add_subcommand("curves", "emit curve CSVs only"), curves_args);

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--model", synth_args.model_id,
                      "one of M1..M6, EPS_TAU, ZERO_BIAS")->required();
    synth->add_option("--n", synth_args.n, "sample count")->required();
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--out", synth_args.out, "output directory");
    synth->add_option("--mu", synth_args.mu, "location parameter");
    synth->add_option("--tau", synth_args.tau, "shift parameter");
    synth->add_option("--sigma", synth_args.sigma, "scale parameter");
    synth->add_option("--epsilon", synth_args.epsilon, "EPS_TAU bias level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("audit")) return run_audit_cmd(audit_args);
        if (app.got_subcommand("explain")) return run_explain_cmd(explain_args);
        if (app.got_subcommand("shapley-bias")) return run_shapley_bias_cmd(shap_args);
        if (app.got_subcommand("group-bias")) return run_group_bias_cmd(group_args);
        if (app.got_subcommand("mitigate")) return run_mitigate_cmd(mitigate_args);
        if (app.got_subcommand("curves")) return run_curves_cmd(curves_args);
        if (app.got_subcommand("synth")) return run_synth_cmd(synth_args);
    } catch (const fairscope::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fairscope::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const fairscope::cap_error& e) {
        std::cerr << "cap exceeded: " << e.what() << '\n';
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
