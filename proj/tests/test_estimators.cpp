#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "tlrisk/errors.hpp"
#include "tlrisk/estimators.hpp"
#include "tlrisk/matrix.hpp"
#include "tlrisk/model.hpp"
#include "tlrisk/numerics.hpp"
#include "tlrisk/rng.hpp"

using namespace tlrisk;
using doctest::Approx;

namespace {

ModelSpec linear_spec(std::size_t d, std::size_t k, double sigma = 1.0) {
    return make_linear_spec(d, k, sigma, SymMatrix::identity(d), SymMatrix::identity(d));
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = sd * rng.next_gaussian();
    return m;
}

// Noiseless dataset assembled by hand, bypassing the label-noise channel.
Dataset exact_dataset(const ModelSpec& spec, const TaskParams& params, std::size_t n,
                      std::uint64_t seed) {
    Rng rng(seed);
    Dataset out;
    out.features = Matrix(n, spec.input_dim);
    out.labels = Matrix(n, spec.output_dim);
    std::vector<double> x(spec.input_dim);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < spec.input_dim; ++j) {
            x[j] = rng.next_gaussian();
            out.features(s, j) = x[j];
        }
        const std::vector<double> y = forward(spec, params, x);
        for (std::size_t j = 0; j < spec.output_dim; ++j)
            out.labels(s, j) = y[j];
    }
    return out;
}

Dataset empty_like(const ModelSpec& spec) {
    Dataset out;
    out.features = Matrix(0, spec.input_dim);
    out.labels = Matrix(0, spec.output_dim);
    return out;
}

} // namespace

TEST_CASE("target-only fit recovers the exact map from clean data") {
    Rng rng(81);
    ModelSpec spec = linear_spec(5, 2);
    TaskParams truth{random_matrix(rng, 2, 5)};
    Dataset target = exact_dataset(spec, truth, 30, 3);
    FitResult fit = fit_weighted_erm(spec, empty_like(spec), target, ErmConfig{});
    CHECK((fit.params.matrix - truth.matrix).frobenius_norm() <= 1e-8);
    CHECK(fit.converged);
    CHECK(fit.source_weight_used == 0.0);
    CHECK_FALSE(fit.objective_trace.has_value());
}

TEST_CASE("fixed-feature family is fit through the hidden representation") {
    Rng rng(82);
    ModelSpec spec = make_fixed_input_spec(4, 2, 6, 1.0, SymMatrix::identity(4),
                                           SymMatrix::identity(4), random_matrix(rng, 6, 4));
    TaskParams truth{random_matrix(rng, 2, 6)};
    Dataset target = exact_dataset(spec, truth, 60, 4);
    FitResult fit = fit_weighted_erm(spec, empty_like(spec), target, ErmConfig{});
    // the fitted map must reproduce the labels even if parameters differ
    CHECK(validation_loss(spec, fit.params, target) <= 1e-10);
}

TEST_CASE("quadratic fits satisfy their normal equations") {
    Rng rng(83);
    ModelSpec spec = linear_spec(6, 3);
    TaskParams truth_s{random_matrix(rng, 3, 6)};
    TaskParams truth_t{random_matrix(rng, 3, 6)};
    Dataset source = sample_dataset(spec, truth_s, 40, CovSide::Source, 11);
    Dataset target = sample_dataset(spec, truth_t, 25, CovSide::Target, 12);

    for (double lambda : {0.0, 0.5, 1.0, 3.0}) {
        ErmConfig config;
        config.source_weight = lambda;
        FitResult fit = fit_weighted_erm(spec, source, target, config);
        CHECK(fit.source_weight_used == lambda);

        const double nt = static_cast<double>(target.size());
        const double ns = static_cast<double>(source.size());
        Matrix g = gram(target.features).scaled(1.0 / nt);
        Matrix rhs = target.labels.transposed() * target.features;
        rhs = rhs.scaled(1.0 / nt);
        if (lambda > 0.0) {
            g.add_scaled(gram(source.features), lambda / ns);
            rhs.add_scaled(source.labels.transposed() * source.features, lambda / ns);
        }
        const Matrix residual = fit.params.matrix * g - rhs;
        CHECK(residual.frobenius_norm() <= 1e-8 * std::max(1.0, rhs.frobenius_norm()));
    }
}

TEST_CASE("pooled fit matches an independent dense solve") {
    Rng rng(84);
    ModelSpec spec = linear_spec(4, 2);
    TaskParams truth{random_matrix(rng, 2, 4)};
    Dataset source = sample_dataset(spec, truth, 30, CovSide::Source, 21);
    Dataset target = sample_dataset(spec, truth, 20, CovSide::Target, 22);

    ErmConfig config;
    config.source_weight = 1.0;
    FitResult fit = fit_weighted_erm(spec, source, target, config);

    Matrix g = gram(target.features).scaled(1.0 / 20.0);
    g.add_scaled(gram(source.features), 1.0 / 30.0);
    Matrix rhs = (target.labels.transposed() * target.features).scaled(1.0 / 20.0);
    rhs.add_scaled(source.labels.transposed() * source.features, 1.0 / 30.0);
    Matrix oracle = weighted_normal_solve(SymMatrix(g), rhs);
    CHECK((fit.params.matrix - oracle).frobenius_norm() <= 1e-10);
}

TEST_CASE("descent drives a one-dimensional net to its optimum") {
    // y = relu(3 x) with the output map frozen at 1: the scalar weight must
    // reach 3 from the default init stream
    ModelSpec spec = make_fixed_output_spec(1, 1, 1, 1.0, SymMatrix::identity(1),
                                            SymMatrix::identity(1), Matrix({{1.0}}));
    TaskParams truth{Matrix({{3.0}})};
    Dataset target = exact_dataset(spec, truth, 50, 5);

    ErmConfig config;
    config.gd.step_size = 0.25;
    config.gd.max_iters = 5000;
    config.gd.rel_tol = 0.0;
    config.gd.init_seed = 0;
    FitResult fit = fit_weighted_erm(spec, empty_like(spec), target, config);
    CHECK(weighted_objective(spec, fit.params, empty_like(spec), target, 0.0) < 1e-6);
    CHECK(fit.params.matrix(0, 0) == Approx(3.0).epsilon(1e-3));
    REQUIRE(fit.objective_trace.has_value());
    const std::vector<double>& trace = *fit.objective_trace;
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= trace[i - 1] + 1e-15);
}

TEST_CASE("descent reports when the iteration budget ran out") {
    Rng rng(85);
    ModelSpec spec = make_fixed_output_spec(3, 2, 4, 1.0, SymMatrix::identity(3),
                                            SymMatrix::identity(3), random_matrix(rng, 2, 4));
    TaskParams truth{random_matrix(rng, 4, 3)};
    Dataset target = sample_dataset(spec, truth, 30, CovSide::Target, 31);

    ErmConfig config;
    config.gd.max_iters = 1;
    config.gd.rel_tol = 1e-300;
    FitResult fit = fit_weighted_erm(spec, empty_like(spec), target, config);
    CHECK_FALSE(fit.converged);

    config.gd.step_size = 0.05; // sized to the curvature; oversteps self-correct
    config.gd.max_iters = 50000;
    config.gd.rel_tol = 1e-8;
    FitResult full = fit_weighted_erm(spec, empty_like(spec), target, config);
    CHECK(full.converged);
}

TEST_CASE("descent gradient matches central finite differences") {
    Rng rng(86);
    ModelSpec spec = make_fixed_output_spec(3, 2, 4, 1.0, SymMatrix::identity(3),
                                            SymMatrix::identity(3), random_matrix(rng, 2, 4));
    TaskParams truth{random_matrix(rng, 4, 3)};
    Dataset source = sample_dataset(spec, truth, 15, CovSide::Source, 41);
    Dataset target = sample_dataset(spec, truth, 12, CovSide::Target, 42);

    // evaluation point kept away from the relu kinks
    TaskParams at{random_matrix(rng, 4, 3)};
    bool clear_of_kinks = false;
    for (int attempt = 0; attempt < 50 && !clear_of_kinks; ++attempt) {
        clear_of_kinks = true;
        for (const Dataset* data : {&source, &target})
            for (std::size_t s = 0; s < data->size() && clear_of_kinks; ++s) {
                const std::vector<double> h = matvec(at.matrix, data->features.row(s));
                for (double v : h)
                    if (std::fabs(v) < 1e-2)
                        clear_of_kinks = false;
            }
        if (!clear_of_kinks)
            at.matrix = random_matrix(rng, 4, 3);
    }
    REQUIRE(clear_of_kinks);

    const double lambda = 0.75;
    Matrix grad = weighted_gradient(spec, at, source, target, lambda);
    const double h = 1e-5;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            TaskParams plus = at;
            TaskParams minus = at;
            plus.matrix(i, j) += h;
            minus.matrix(i, j) -= h;
            const double numeric = (weighted_objective(spec, plus, source, target, lambda) -
                                    weighted_objective(spec, minus, source, target, lambda)) /
                                   (2.0 * h);
            CHECK(grad(i, j) == Approx(numeric).epsilon(1e-4).scale(1.0));
        }
}

TEST_CASE("weight selection on pinned grids") {
    Rng rng(87);
    ModelSpec spec = linear_spec(4, 2);
    TaskParams truth{random_matrix(rng, 2, 4)};
    Dataset source = sample_dataset(spec, truth, 40, CovSide::Source, 51);
    Dataset target = sample_dataset(spec, truth, 10, CovSide::Target, 52);
    Dataset validation = sample_dataset(spec, truth, 25, CovSide::Target, 53);

    FitResult only_zero = select_lambda(spec, source, target, validation, {0.0});
    CHECK(only_zero.source_weight_used == 0.0);

    // an identical copy of the target data leaves every fit unchanged, so
    // ties resolve to the smallest candidate
    FitResult tied = select_lambda(spec, target, target, validation, {0.0, 0.5, 1.0});
    CHECK(tied.source_weight_used == 0.0);

    CHECK_THROWS_AS(select_lambda(spec, source, target, validation, {}), InvalidInput);
    CHECK_THROWS_AS(select_lambda(spec, source, target, validation, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(select_lambda(spec, source, target, empty_like(spec), {0.0, 1.0}),
                    EmptyDataset);
}

TEST_CASE("weight selection prefers source data exactly when it helps") {
    ModelSpec spec = linear_spec(20, 5);
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const int trials = 20;

    int positive_when_identical = 0;
    int small_when_far = 0;
    int monotone_gain = 0;
    for (int t = 0; t < trials; ++t) {
        PairRecipe same;
        same.base_seed = 7000 + t;
        same.perturbation_variance = 0.0;
        TaskPair pair = make_synthetic_pair(spec, same);
        Dataset source = sample_dataset(spec, pair.source, 400, CovSide::Source,
                                        derive_stream(1000, {1, static_cast<std::uint64_t>(t)}));
        Dataset target = sample_dataset(spec, pair.target, 20, CovSide::Target,
                                        derive_stream(1000, {2, static_cast<std::uint64_t>(t)}));
        Dataset validation = sample_dataset(spec, pair.target, 50, CovSide::Target,
                                            derive_stream(1000, {3, static_cast<std::uint64_t>(t)}));
        FitResult pick = select_lambda(spec, source, target, validation, grid);
        if (pick.source_weight_used > 0.0)
            ++positive_when_identical;

        ErmConfig pooled;
        pooled.source_weight = 1.0;
        const double pooled_risk =
            closed_form_risk(spec, fit_weighted_erm(spec, source, target, pooled).params,
                             pair.target);
        const double alone_risk =
            closed_form_risk(spec, fit_weighted_erm(spec, source, target, ErmConfig{}).params,
                             pair.target);
        if (pooled_risk <= alone_risk)
            ++monotone_gain;

        PairRecipe far = same;
        far.base_seed = 8000 + t;
        far.perturbation_variance = 100.0;
        TaskPair far_pair = make_synthetic_pair(spec, far);
        Dataset far_source = sample_dataset(spec, far_pair.source, 400, CovSide::Source,
                                            derive_stream(2000, {1, static_cast<std::uint64_t>(t)}));
        Dataset far_target = sample_dataset(spec, far_pair.target, 20, CovSide::Target,
                                            derive_stream(2000, {2, static_cast<std::uint64_t>(t)}));
        Dataset far_validation =
            sample_dataset(spec, far_pair.target, 50, CovSide::Target,
                           derive_stream(2000, {3, static_cast<std::uint64_t>(t)}));
        FitResult far_pick = select_lambda(spec, far_source, far_target, far_validation, grid);
        if (far_pick.source_weight_used <= 0.25)
            ++small_when_far;
    }
    CHECK(positive_when_identical >= 16);
    CHECK(small_when_far >= 16);
    CHECK(monotone_gain >= 18);
}

TEST_CASE("closed-form risk on pinned instances") {
    ModelSpec spec = linear_spec(2, 3);
    TaskParams truth{Matrix(3, 2, 0.5)};
    CHECK(closed_form_risk(spec, truth, truth) == Approx(3.0).epsilon(1e-13));

    TaskParams off{truth.matrix + Matrix({{2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}})};
    CHECK(closed_form_risk(spec, off, truth) == Approx(7.0).epsilon(1e-12));
}

TEST_CASE("sampled risk converges to the closed form") {
    ModelSpec spec = linear_spec(3, 2);
    TaskParams truth{Matrix(2, 3, 0.25)};
    CHECK(mc_risk(spec, truth, truth, 100000, 61) == Approx(2.0).epsilon(0.03));

    ModelSpec quiet = linear_spec(3, 2, 1e-6);
    CHECK(mc_risk(quiet, truth, truth, 1000, 62) < 1e-9);

    Rng rng(88);
    for (int inst = 0; inst < 5; ++inst) {
        TaskParams estimate{truth.matrix + random_matrix(rng, 2, 3, 0.3)};
        const double closed = closed_form_risk(spec, estimate, truth);
        CHECK(mc_risk(spec, estimate, truth, 200000, 63 + inst) == Approx(closed).epsilon(0.03));
    }
}

TEST_CASE("fixed-output risk dominates its companion bound") {
    Rng rng(89);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t d = 1 + rng.next_u64() % 5;
        const std::size_t k = 1 + rng.next_u64() % 4;
        const std::size_t width = 1 + rng.next_u64() % 5;
        ModelSpec spec = make_fixed_output_spec(d, k, width, 0.5, SymMatrix::identity(d),
                                                SymMatrix::identity(d),
                                                random_matrix(rng, k, width));
        TaskParams truth{random_matrix(rng, width, d)};
        TaskParams estimate{random_matrix(rng, width, d)};
        const double risk = closed_form_risk(spec, estimate, truth);
        const double floor = fixed_output_risk_lower_bound(spec, estimate, truth);
        CHECK(risk >= floor - 1e-9 * std::max(1.0, floor));
    }
    CHECK_THROWS_AS(fixed_output_risk_lower_bound(linear_spec(2, 2), TaskParams{Matrix(2, 2)},
                                                  TaskParams{Matrix(2, 2)}),
                    InvalidInput);
}

TEST_CASE("estimator error contracts") {
    ModelSpec spec = linear_spec(3, 2);
    Dataset none = empty_like(spec);
    Dataset some = sample_dataset(spec, TaskParams{Matrix(2, 3)}, 5, CovSide::Target, 71);

    CHECK_THROWS_AS(fit_weighted_erm(spec, some, none, ErmConfig{}), EmptyDataset);
    ErmConfig weighted;
    weighted.source_weight = 0.5;
    CHECK_THROWS_AS(fit_weighted_erm(spec, none, some, weighted), EmptyDataset);
    ErmConfig negative;
    negative.source_weight = -0.25;
    CHECK_THROWS_AS(fit_weighted_erm(spec, some, some, negative), InvalidInput);

    CHECK_THROWS_AS(weighted_gradient(spec, TaskParams{Matrix(2, 3)}, none, some, 0.0),
                    InvalidInput); // gradient path exists for the descent family only
    CHECK_THROWS_AS(mc_risk(spec, TaskParams{Matrix(2, 3)}, TaskParams{Matrix(2, 3)}, 0, 1),
                    InvalidInput);
    CHECK_THROWS_AS(closed_form_risk(spec, TaskParams{Matrix(3, 3)}, TaskParams{Matrix(2, 3)}),
                    ShapeError);
    CHECK_THROWS_AS(validation_loss(spec, TaskParams{Matrix(2, 3)}, none), EmptyDataset);

    Dataset bad = some;
    bad.features(0, 0) = std::nan("");
    CHECK_THROWS_AS(fit_weighted_erm(spec, none, bad, ErmConfig{}), InvalidInput);
}
