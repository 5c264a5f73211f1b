#include "tlrisk/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "tlrisk/bounds.hpp"
#include "tlrisk/config.hpp"
#include "tlrisk/errors.hpp"
#include "tlrisk/io.hpp"
#include "tlrisk/metrics.hpp"
#include "tlrisk/rng.hpp"

namespace tlrisk {

namespace {

struct CellResult {
    bool ok = false;
    double mc = 0.0;
    double closed = 0.0;
    double distance = 0.0;
    std::string error;
};

void validate_config(const SweepConfig& config) {
    if (config.trials < 1)
        throw ConfigError("trials must be at least 1");
    if (config.n_test < 1)
        throw ConfigError("n_test must be at least 1");
    if (config.axis_values.empty())
        throw ConfigError("axis_values must be nonempty");
    // Any order is accepted (cells are order-independent by design); only
    // duplicates are rejected, since they would collapse to identical cells.
    for (std::size_t i = 0; i < config.axis_values.size(); ++i)
        for (std::size_t j = i + 1; j < config.axis_values.size(); ++j)
            if (config.axis_values[i] == config.axis_values[j])
                throw ConfigError("axis_values must be distinct");
    for (double v : config.axis_values)
        if (!std::isfinite(v) || v < 0.0)
            throw ConfigError("axis_values must be nonnegative and finite");
    if (config.axis == SweepAxis::NSource || config.axis == SweepAxis::NTarget) {
        for (double v : config.axis_values)
            if (v != std::floor(v))
                throw ConfigError("sample-count axis values must be integers");
        if (config.axis == SweepAxis::NSource && config.fixed_n_target < 1)
            throw ConfigError("sweeping n_source requires fixed_n_target >= 1");
        if (config.axis == SweepAxis::NTarget)
            for (double v : config.axis_values)
                if (v < 1.0)
                    throw ConfigError("n_target must stay >= 1");
    } else {
        if (config.fixed_n_target < 1)
            throw ConfigError("delta sweep requires fixed_n_target >= 1");
    }
    if (config.lambda_policy.use_grid) {
        if (config.lambda_policy.grid.empty())
            throw ConfigError("weight selection requires a nonempty grid");
        if (config.lambda_policy.n_validation < 1)
            throw ConfigError("weight selection requires n_validation >= 1");
    } else if (config.lambda_policy.fixed_weight < 0.0) {
        throw ConfigError("fixed source weight must be nonnegative");
    }
}

struct CellLayout {
    std::size_t n_source;
    std::size_t n_target;
    double scale;
};

CellLayout cell_layout(const SweepConfig& config, double axis_value) {
    CellLayout layout{config.fixed_n_source, config.fixed_n_target, config.recipe.scale};
    switch (config.axis) {
        case SweepAxis::NSource:
            layout.n_source = static_cast<std::size_t>(std::llround(axis_value));
            break;
        case SweepAxis::NTarget:
            layout.n_target = static_cast<std::size_t>(std::llround(axis_value));
            break;
        case SweepAxis::DeltaScale:
            layout.scale = axis_value;
            break;
    }
    return layout;
}

CellResult run_cell(const SweepConfig& config, double axis_value, std::size_t trial) {
    CellResult result;
    try {
        CellLayout layout = cell_layout(config, axis_value);

        PairRecipe recipe = config.recipe;
        recipe.base_seed = derive_stream(config.master_seed, {seed_role::kPair, trial});
        recipe.scale = layout.scale;
        TaskPair pair = make_synthetic_pair(config.spec, recipe);

        Dataset source;
        bool need_source = layout.n_source > 0 &&
                           (config.lambda_policy.use_grid ||
                            config.lambda_policy.fixed_weight > 0.0);
        if (need_source)
            source = sample_dataset(config.spec, pair.source, layout.n_source, CovSide::Source,
                                    derive_stream(config.master_seed, {seed_role::kSource, trial}));
        Dataset target = sample_dataset(config.spec, pair.target, layout.n_target,
                                        CovSide::Target,
                                        derive_stream(config.master_seed, {seed_role::kTarget, trial}));

        GdConfig gd = config.gd;
        gd.init_seed = derive_stream(config.master_seed, {seed_role::kGdInit, trial});

        FitResult fit;
        if (config.lambda_policy.use_grid) {
            Dataset validation = sample_dataset(
                config.spec, pair.target, config.lambda_policy.n_validation, CovSide::Target,
                derive_stream(config.master_seed, {seed_role::kValidation, trial}));
            validation.role = DataRole::Validation;
            fit = select_lambda(config.spec, source, target, validation,
                                config.lambda_policy.grid, gd);
        } else {
            fit = fit_weighted_erm(config.spec, source, target,
                                   ErmConfig{config.lambda_policy.fixed_weight, gd});
        }

        result.mc = mc_risk(config.spec, fit.params, pair.target, config.n_test,
                            derive_stream(config.master_seed, {seed_role::kTest, trial}));
        result.closed = closed_form_risk(config.spec, fit.params, pair.target);
        result.distance = transfer_distance(config.spec, pair).rho;
        result.ok = true;
    } catch (const Error& e) {
        result.error = e.what();
    }
    return result;
}

} // namespace

SweepSeries run_sweep(const SweepConfig& config, std::size_t threads) {
    validate_config(config);
    if (threads < 1)
        threads = 1;

    const std::size_t n_axis = config.axis_values.size();
    const std::size_t n_cells = n_axis * config.trials;
    std::vector<CellResult> cells(n_cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= n_cells)
                break;
            std::size_t a = idx / config.trials;
            std::size_t t = idx % config.trials;
            cells[idx] = run_cell(config, config.axis_values[a], t);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    SweepSeries series;
    series.metadata_json = resolved_sweep_json(config);
    series.points.reserve(n_axis);
    for (std::size_t a = 0; a < n_axis; ++a) {
        SweepPoint point;
        point.x = config.axis_values[a];
        CellLayout layout = cell_layout(config, point.x);
        point.n_source = layout.n_source;
        point.n_target = layout.n_target;

        double sum_mc = 0.0, sum_closed = 0.0, sum_dist = 0.0;
        std::size_t ok_count = 0;
        for (std::size_t t = 0; t < config.trials; ++t) {
            const CellResult& cell = cells[a * config.trials + t];
            if (!cell.ok) {
                ++point.failed_trials;
                std::ostringstream msg;
                msg << "axis=" << format_sig(point.x, 6) << " trial=" << t << ": "
                    << cell.error;
                series.failures.push_back(msg.str());
                continue;
            }
            sum_mc += cell.mc;
            sum_closed += cell.closed;
            sum_dist += cell.distance;
            ++ok_count;
        }

        if (ok_count > 0) {
            point.mean_error = sum_mc / static_cast<double>(ok_count);
            point.mean_closed_form = sum_closed / static_cast<double>(ok_count);
            point.mean_distance = sum_dist / static_cast<double>(ok_count);
            double ss = 0.0;
            for (std::size_t t = 0; t < config.trials; ++t) {
                const CellResult& cell = cells[a * config.trials + t];
                if (!cell.ok)
                    continue;
                double d = cell.mc - point.mean_error;
                ss += d * d;
            }
            point.std_error =
                ok_count > 1 ? std::sqrt(ss / static_cast<double>(ok_count - 1)) : 0.0;
            try {
                BoundInput in = bound_input_from_spec(config.spec, point.mean_distance,
                                                      point.n_source, point.n_target);
                point.risk_floor = minimax_floor(config.spec, in).risk_floor;
            } catch (const Error& e) {
                point.risk_floor = std::nan("");
                series.failures.push_back(std::string("floor at axis=") +
                                          format_sig(point.x, 6) + ": " + e.what());
            }
        } else {
            point.mean_error = std::nan("");
            point.mean_closed_form = std::nan("");
            point.mean_distance = std::nan("");
            point.risk_floor = std::nan("");
        }
        series.points.push_back(point);
    }
    return series;
}

namespace {

void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
}

} // namespace

void emit_dat(const SweepSeries& series, const std::string& path) {
    if (series.points.empty())
        throw EmptySeries("refusing to write an empty series");
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open output file: " + path);
    for (const SweepPoint& p : series.points)
        out << format_sig(p.x, 6) << ' ' << format_sig(p.mean_error, 6) << '\n';
    if (!out)
        throw IoError("failed while writing: " + path);
    out.close();

    std::ofstream meta(path + ".meta", std::ios::binary);
    if (!meta)
        throw IoError("cannot open metadata file: " + path + ".meta");
    meta << series.metadata_json;
    if (!series.metadata_json.empty() && series.metadata_json.back() != '\n')
        meta << '\n';
    if (!meta)
        throw IoError("failed while writing: " + path + ".meta");
}

void emit_csv(const SweepSeries& series, const std::string& path) {
    if (series.points.empty())
        throw EmptySeries("refusing to write an empty series");
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open output file: " + path);
    out << "x,mean,std,floor\n";
    for (const SweepPoint& p : series.points)
        out << format_sig(p.x, 9) << ',' << format_sig(p.mean_error, 9) << ','
            << format_sig(p.std_error, 9) << ',' << format_sig(p.risk_floor, 9) << '\n';
    if (!out)
        throw IoError("failed while writing: " + path);
}

std::string resolve_output_path(const std::string& path) {
    if (path.empty())
        throw ConfigError("output path is empty");
    std::filesystem::path p(path);
    if (p.is_absolute())
        return path;
    const char* base = std::getenv("TLRISK_OUTPUT_DIR");
    if (base == nullptr || *base == '\0')
        return path;
    return (std::filesystem::path(base) / p).string();
}

} // namespace tlrisk
