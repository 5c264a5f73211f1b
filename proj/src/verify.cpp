#include "tlrisk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tlrisk/bounds.hpp"
#include "tlrisk/errors.hpp"
#include "tlrisk/estimators.hpp"
#include "tlrisk/harness.hpp"
#include "tlrisk/kernels.hpp"
#include "tlrisk/mc_oracles.hpp"
#include "tlrisk/metrics.hpp"
#include "tlrisk/model.hpp"
#include "tlrisk/numerics.hpp"
#include "tlrisk/rng.hpp"

namespace tlrisk {

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = sd * rng.next_gaussian();
    return m;
}

SymMatrix random_psd(Rng& rng, std::size_t n) {
    Matrix g = random_matrix(rng, n + 2, n);
    return SymMatrix(gram(g).scaled(1.0 / static_cast<double>(n + 2)));
}

bool check_kernel_vs_sampling(bool quick, std::string& detail) {
    const std::size_t instances = quick ? 3 : 10;
    const std::size_t samples = quick ? 200000 : 1000000;
    Rng rng(101);
    double worst = 0.0;
    for (std::size_t k = 0; k < instances; ++k) {
        Matrix w = random_matrix(rng, 5, 8);
        SymMatrix cov = random_psd(rng, 8);
        ArcCosCovariance closed = arccos_covariance(w, cov);
        Matrix sampled = mc_arccos_covariance(w, cov, samples, 7000 + k);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                double c = closed.matrix(i, j);
                if (std::abs(c) <= 0.01)
                    continue;
                worst = std::max(worst, std::abs(sampled(i, j) - c) / std::abs(c));
            }
    }
    std::ostringstream msg;
    msg << "max relative gap " << worst;
    detail = msg.str();
    return worst <= 0.02;
}

bool check_discrepancy(bool quick, std::string& detail) {
    const std::size_t pairs = quick ? 200 : 1000;
    Rng rng(202);
    double worst_violation = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        std::size_t dim = 1 + rng.next_u64() % 8;
        Matrix a = random_matrix(rng, 1, dim);
        Matrix b;
        switch (k % 5) {
            case 0: b = random_matrix(rng, 1, dim); break;
            case 1: b = a.scaled(1.0 + 1e-8); break;          // nearly parallel
            case 2: b = a.scaled(-1.0); break;                // antiparallel: equality case
            case 3: b = Matrix(1, dim, 0.0); break;           // null side
            case 4: b = a.scaled(0.3 + rng.next_double()); break;
        }
        double lhs = relu_discrepancy(a.row(0), b.row(0));
        Matrix diff = a - b;
        double rhs = 0.25 * diff.frobenius_norm() * diff.frobenius_norm();
        worst_violation = std::max(worst_violation, rhs - lhs);
    }
    // sampling spot check on one random pair
    Matrix a = random_matrix(rng, 1, 6);
    Matrix b = random_matrix(rng, 1, 6);
    double closed = relu_discrepancy(a.row(0), b.row(0));
    double sampled = mc_relu_discrepancy(a.row(0), b.row(0), quick ? 200000 : 1000000, 303);
    double gap = std::abs(sampled - closed) / std::max(closed, 1e-12);
    std::ostringstream msg;
    msg << "worst quarter-bound violation " << worst_violation << ", sampling gap " << gap;
    detail = msg.str();
    return worst_violation <= 1e-12 && gap <= 0.02;
}

ModelSpec small_spec(ModelKind kind, Rng& rng) {
    std::size_t d = 6, k = 3, l = 4;
    SymMatrix cov_s = random_psd(rng, d);
    SymMatrix cov_t = random_psd(rng, d);
    switch (kind) {
        case ModelKind::Linear:
            return make_linear_spec(d, k, 0.7, cov_s, cov_t);
        case ModelKind::NetFixedOutput:
            return make_fixed_output_spec(d, k, l, 0.7, cov_s, cov_t,
                                          random_matrix(rng, k, l));
        case ModelKind::NetFixedInput:
            return make_fixed_input_spec(d, k, l, 0.7, cov_s, cov_t,
                                         random_matrix(rng, l, d));
    }
    throw InvalidInput("unknown kind");
}

bool check_risk_vs_sampling(bool quick, std::string& detail) {
    const std::size_t instances = quick ? 2 : 4;
    const std::size_t samples = quick ? 200000 : 1000000;
    Rng rng(404);
    double worst = 0.0;
    for (ModelKind kind :
         {ModelKind::Linear, ModelKind::NetFixedOutput, ModelKind::NetFixedInput}) {
        for (std::size_t k = 0; k < instances; ++k) {
            ModelSpec spec = small_spec(kind, rng);
            TaskParams estimate{random_matrix(rng, trainable_rows(spec), trainable_cols(spec))};
            TaskParams truth{random_matrix(rng, trainable_rows(spec), trainable_cols(spec))};
            double closed = closed_form_risk(spec, estimate, truth);
            double sampled = mc_risk(spec, estimate, truth, samples, 9000 + k);
            worst = std::max(worst, std::abs(sampled - closed) / closed);
        }
    }
    std::ostringstream msg;
    msg << "max relative gap " << worst;
    detail = msg.str();
    return worst <= 0.02;
}

bool check_floor_identities(bool quick, std::string& detail) {
    const std::size_t draws = quick ? 2000 : 10000;
    Rng rng(505);
    double worst_rel = 0.0;
    bool thresholds_ordered = true;
    for (std::size_t k = 0; k < draws; ++k) {
        BoundInput in;
        in.effective_dim = 20 + rng.next_u64() % 10000;
        in.r_source = 0.1 + 5.0 * rng.next_double();
        in.r_target = 0.1 + 5.0 * rng.next_double();
        in.n_source = rng.next_u64() % 100000;
        in.n_target = 1 + rng.next_u64() % 10000;
        in.noise_stddev = 0.1 + 3.0 * rng.next_double();
        in.distance_budget = 0.0;

        if (threshold_small(in) > threshold_large(in))
            thresholds_ordered = false;

        double expected = 6.0 / 1000.0 * static_cast<double>(in.effective_dim) *
                          in.noise_stddev * in.noise_stddev /
                          (in.r_source * static_cast<double>(in.n_source) +
                           in.r_target * static_cast<double>(in.n_target));
        double got = bound_B(in);
        worst_rel = std::max(worst_rel, std::abs(got - expected) / expected);
    }

    // large-distance floor must ignore the source sample count entirely
    BoundInput large;
    large.effective_dim = 499;
    large.r_source = 2.0;
    large.r_target = 1.0;
    large.n_target = 50;
    large.noise_stddev = 1.0;
    large.distance_budget = 100.0;
    large.n_source = 0;
    double b0 = bound_B(large);
    large.n_source = 1000;
    double b1 = bound_B(large);
    large.n_source = 1000000;
    double b2 = bound_B(large);

    std::ostringstream msg;
    msg << "small-branch max relative error " << worst_rel;
    detail = msg.str();
    return worst_rel <= 1e-14 && thresholds_ordered && b0 == b1 && b1 == b2;
}

bool check_kl(bool quick, std::string& detail) {
    const std::size_t samples = quick ? 200000 : 1000000;
    Rng rng(606);
    double worst = 0.0;
    for (std::size_t k = 0; k < (quick ? 2u : 5u); ++k) {
        SymMatrix cov_s = random_psd(rng, 4);
        SymMatrix cov_t = random_psd(rng, 4);
        ModelSpec spec = make_linear_spec(4, 2, 1.0, cov_s, cov_t);
        TaskParams p1{random_matrix(rng, 2, 4, 0.5)};
        TaskParams p2{random_matrix(rng, 2, 4, 0.5)};
        double closed = kl_divergence(spec, p1, p2, CovSide::Target).value;
        double sampled = mc_kl_divergence(spec, p1, p2, CovSide::Target, samples, 1200 + k);
        if (closed > 0.05)
            worst = std::max(worst, std::abs(sampled - closed) / closed);
    }

    bool dominated = true;
    for (std::size_t k = 0; k < (quick ? 10u : 50u); ++k) {
        Rng local(800 + k);
        ModelSpec spec = small_spec(ModelKind::NetFixedOutput, local);
        TaskParams p1{random_matrix(local, trainable_rows(spec), trainable_cols(spec), 0.4)};
        TaskParams p2{random_matrix(local, trainable_rows(spec), trainable_cols(spec), 0.4)};
        double upper = kl_divergence(spec, p1, p2, CovSide::Target).value;
        double sampled =
            mc_kl_divergence(spec, p1, p2, CovSide::Target, quick ? 50000 : 200000, 1300 + k);
        if (sampled > upper)
            dominated = false;
    }

    std::ostringstream msg;
    msg << "linear sampling gap " << worst << (dominated ? "" : ", bound violated");
    detail = msg.str();
    return worst <= 0.03 && dominated;
}

bool check_sweep_determinism(bool, std::string& detail) {
    SweepConfig config;
    config.spec = make_linear_spec(8, 3, 1.0, SymMatrix::scaled_identity(8, 2.0),
                                   SymMatrix::identity(8));
    config.recipe = PairRecipe{0, 4.0, 0.01, 1.0, CovSide::Source};
    config.axis = SweepAxis::NSource;
    config.axis_values = {20, 40};
    config.fixed_n_target = 10;
    config.lambda_policy.fixed_weight = 1.0;
    config.trials = 3;
    config.n_test = 50;
    config.master_seed = 2024;
    config.output_path = "verify.dat";

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "tlrisk-verify";
    fs::create_directories(dir);
    auto render = [&](std::size_t threads, const char* name) {
        SweepSeries series = run_sweep(config, threads);
        fs::path p = dir / name;
        emit_dat(series, p.string());
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    std::string serial = render(1, "serial.dat");
    std::string parallel = render(4, "parallel.dat");
    detail = serial == parallel ? "identical bytes across thread counts"
                                : "outputs differ across thread counts";
    return serial == parallel;
}

} // namespace

bool run_verification(bool quick, std::ostream& out) {
    struct Check {
        const char* name;
        std::function<bool(bool, std::string&)> fn;
    };
    const Check checks[] = {
        {"relu-second-moment-vs-sampling", check_kernel_vs_sampling},
        {"relu-discrepancy", check_discrepancy},
        {"closed-form-risk-vs-sampling", check_risk_vs_sampling},
        {"floor-identities", check_floor_identities},
        {"kl-divergence", check_kl},
        {"sweep-determinism", check_sweep_determinism},
    };

    bool all_ok = true;
    for (const Check& check : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = check.fn(quick, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        out << (ok ? "[ ok ] " : "[FAIL] ") << check.name;
        if (!detail.empty())
            out << " (" << detail << ")";
        out << '\n';
        all_ok = all_ok && ok;
    }
    return all_ok;
}

} // namespace tlrisk
