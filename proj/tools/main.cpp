#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tlrisk/bounds.hpp"
#include "tlrisk/config.hpp"
#include "tlrisk/errors.hpp"
#include "tlrisk/estimators.hpp"
#include "tlrisk/harness.hpp"
#include "tlrisk/io.hpp"
#include "tlrisk/kernels.hpp"
#include "tlrisk/metrics.hpp"
#include "tlrisk/model.hpp"
#include "tlrisk/rng.hpp"
#include "tlrisk/verify.hpp"

namespace {

using namespace tlrisk;

// Default fixed maps when a net model is requested by flags alone: an
// all-ones output map, and a feature map whose rows cycle through the
// standard basis.
Matrix default_output_map(std::size_t output_dim, std::size_t hidden_width) {
    return Matrix(output_dim, hidden_width, 1.0);
}

Matrix default_feature_map(std::size_t hidden_width, std::size_t input_dim) {
    Matrix w(hidden_width, input_dim, 0.0);
    for (std::size_t i = 0; i < hidden_width; ++i)
        w(i, i % input_dim) = 1.0;
    return w;
}

struct BoundArgs {
    std::string model = "linear";
    std::string spec_path;
    double delta = 0.0;
    std::size_t n_source = 0;
    std::size_t n_target = 1;
    double sigma = 1.0;
    std::size_t d = 0;
    std::size_t k = 0;
    std::size_t l = 0;
};

ModelSpec spec_from_bound_args(const BoundArgs& args) {
    if (!args.spec_path.empty())
        return load_model_spec(args.spec_path);
    if (args.d == 0 || args.k == 0)
        throw ConfigError("bound needs --spec, or --d and --k");
    SymMatrix cov = SymMatrix::identity(args.d);
    if (args.model == "linear")
        return make_linear_spec(args.d, args.k, args.sigma, cov, cov);
    if (args.l == 0)
        throw ConfigError("net models need --l");
    if (args.model == "net_fixed_output")
        return make_fixed_output_spec(args.d, args.k, args.l, args.sigma, cov, cov,
                                      default_output_map(args.k, args.l));
    if (args.model == "net_fixed_input")
        return make_fixed_input_spec(args.d, args.k, args.l, args.sigma, cov, cov,
                                     default_feature_map(args.l, args.d));
    throw ConfigError("unknown model: " + args.model);
}

void run_bound(const BoundArgs& args) {
    ModelSpec spec = spec_from_bound_args(args);
    BoundInput in = bound_input_from_spec(spec, args.delta, args.n_source, args.n_target);
    std::cout << format_report(minimax_floor(spec, in), in);
}

struct DistanceArgs {
    std::string spec_path;
    std::string source_path;
    std::string target_path;
    std::optional<double> delta;
};

void run_distance(const DistanceArgs& args) {
    ModelSpec spec = load_model_spec(args.spec_path);
    TaskPair pair{TaskParams{read_matrix_file(args.source_path)},
                  TaskParams{read_matrix_file(args.target_path)}};
    DistanceReport report = transfer_distance(spec, pair, args.delta);
    std::cout << "rho=" << report.rho << '\n';
    if (report.class_budget) {
        std::cout << "class_budget=" << *report.class_budget << '\n'
                  << "within_class=" << (report.within_class() ? 1 : 0) << '\n';
    }
}

struct KernelArgs {
    std::string weights_path;
    std::string cov_path;
    std::string out_path;
};

void run_kernel(const KernelArgs& args) {
    Matrix weights = read_matrix_file(args.weights_path);
    SymMatrix cov = args.cov_path.empty()
                        ? SymMatrix::identity(weights.cols())
                        : SymMatrix(read_matrix_file(args.cov_path));
    ArcCosCovariance result = arccos_covariance(weights, cov);
    if (args.out_path.empty())
        write_matrix(std::cout, result.matrix.full());
    else
        write_matrix_file(args.out_path, result.matrix.full());
}

void run_simulate(const std::string& config_path) {
    SimulateConfig config = load_simulate_config(config_path);

    PairRecipe recipe = config.recipe;
    recipe.base_seed = derive_stream(config.seed, {seed_role::kPair, 0});
    TaskPair pair = make_synthetic_pair(config.spec, recipe);

    Dataset source;
    bool need_source = config.n_source > 0 && (config.lambda_policy.use_grid ||
                                               config.lambda_policy.fixed_weight > 0.0);
    if (need_source)
        source = sample_dataset(config.spec, pair.source, config.n_source, CovSide::Source,
                                derive_stream(config.seed, {seed_role::kSource, 0}));
    Dataset target =
        sample_dataset(config.spec, pair.target, config.n_target, CovSide::Target,
                       derive_stream(config.seed, {seed_role::kTarget, 0}));

    GdConfig gd = config.gd;
    gd.init_seed = derive_stream(config.seed, {seed_role::kGdInit, 0});

    FitResult fit;
    if (config.lambda_policy.use_grid) {
        Dataset validation = sample_dataset(
            config.spec, pair.target, config.lambda_policy.n_validation, CovSide::Target,
            derive_stream(config.seed, {seed_role::kValidation, 0}));
        fit = select_lambda(config.spec, source, target, validation, config.lambda_policy.grid,
                            gd);
    } else {
        fit = fit_weighted_erm(config.spec, source, target,
                               ErmConfig{config.lambda_policy.fixed_weight, gd});
    }

    double rho = transfer_distance(config.spec, pair).rho;
    double mc = mc_risk(config.spec, fit.params, pair.target, config.n_test,
                        derive_stream(config.seed, {seed_role::kTest, 0}));

    std::cout << "n_source=" << config.n_source << '\n'
              << "n_target=" << config.n_target << '\n'
              << "source_weight=" << fit.source_weight_used << '\n'
              << "converged=" << (fit.converged ? 1 : 0) << '\n'
              << "distance=" << rho << '\n'
              << "mc_risk=" << mc << '\n'
              << "closed_form_risk=" << closed_form_risk(config.spec, fit.params, pair.target)
              << '\n';
    try {
        BoundInput in =
            bound_input_from_spec(config.spec, rho, config.n_source, config.n_target);
        std::cout << "risk_floor=" << minimax_floor(config.spec, in).risk_floor << '\n';
    } catch (const Error&) {
        // floor undefined for this geometry (e.g. effective_dim < 20); leave it out
    }
}

struct SweepArgs {
    std::string config_path;
    bool csv = false;
    std::size_t threads = 1;
};

void run_sweep_command(const SweepArgs& args) {
    SweepConfig config = load_sweep_config(args.config_path);
    SweepSeries series = run_sweep(config, args.threads);

    std::string out_path = resolve_output_path(config.output_path);
    emit_dat(series, out_path);
    std::cout << "wrote " << out_path << " (" << series.points.size() << " points)\n";
    if (args.csv) {
        std::string csv_path =
            std::filesystem::path(out_path).replace_extension(".csv").string();
        emit_csv(series, csv_path);
        std::cout << "wrote " << csv_path << '\n';
    }
    for (const std::string& failure : series.failures)
        std::cerr << "warning: " << failure << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk formulas, minimax floors, and simulation sweeps for "
                 "source-to-target regression transfer"};
    app.require_subcommand(1);

    BoundArgs bound_args;
    CLI::App* bound = app.add_subcommand("bound", "minimax risk floor for a model class");
    CLI::Option* bound_spec =
        bound->add_option("--spec", bound_args.spec_path, "model spec JSON file");
    bound->add_option("--model", bound_args.model,
                      "linear | net_fixed_output | net_fixed_input")
        ->excludes(bound_spec);
    bound->add_option("--delta", bound_args.delta, "class distance budget");
    bound->add_option("--ns", bound_args.n_source, "source sample count");
    bound->add_option("--nt", bound_args.n_target, "target sample count");
    bound->add_option("--sigma", bound_args.sigma, "label noise stddev")->excludes(bound_spec);
    bound->add_option("--d", bound_args.d, "input dimension")->excludes(bound_spec);
    bound->add_option("--k", bound_args.k, "output dimension")->excludes(bound_spec);
    bound->add_option("--l", bound_args.l, "hidden width")->excludes(bound_spec);
    bound->callback([&]() { run_bound(bound_args); });

    DistanceArgs distance_args;
    double distance_delta = 0.0;
    CLI::App* distance =
        app.add_subcommand("distance", "transfer distance between two parameter matrices");
    distance->add_option("--spec", distance_args.spec_path, "model spec JSON file")->required();
    distance->add_option("--source", distance_args.source_path, "source parameter matrix file")
        ->required();
    distance->add_option("--target", distance_args.target_path, "target parameter matrix file")
        ->required();
    CLI::Option* delta_opt =
        distance->add_option("--delta", distance_delta, "also check membership at this budget");
    distance->callback([&]() {
        if (delta_opt->count() > 0)
            distance_args.delta = distance_delta;
        run_distance(distance_args);
    });

    KernelArgs kernel_args;
    CLI::App* kernel =
        app.add_subcommand("kernel", "relu second-moment matrix of a weight matrix");
    kernel->add_option("--weights", kernel_args.weights_path, "weight matrix file")->required();
    kernel->add_option("--cov", kernel_args.cov_path,
                       "input covariance matrix file (identity when omitted)");
    kernel->add_option("--out", kernel_args.out_path, "write here instead of stdout");
    kernel->callback([&]() { run_kernel(kernel_args); });

    std::string simulate_config;
    CLI::App* simulate = app.add_subcommand("simulate", "one fit plus its risk report");
    simulate->add_option("--config", simulate_config, "simulate config JSON file")->required();
    simulate->callback([&]() { run_simulate(simulate_config); });

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "trial-averaged sweep to a .dat plot table");
    sweep->add_option("--config", sweep_args.config_path, "sweep config JSON file")->required();
    sweep->add_flag("--csv", sweep_args.csv, "also write an x,mean,std,floor CSV");
    sweep->add_option("--threads", sweep_args.threads, "worker thread count")
        ->check(CLI::PositiveNumber);
    sweep->callback([&]() { run_sweep_command(sweep_args); });

    bool verify_quick = false;
    int verify_rc = 0;
    CLI::App* verify = app.add_subcommand("verify", "sampling-oracle self checks");
    verify->add_flag("--quick", verify_quick, "reduced sample counts");
    verify->callback([&]() { verify_rc = run_verification(verify_quick, std::cout) ? 0 : 3; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return verify_rc;
}
