#include "tlrisk/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tlrisk/errors.hpp"
#include "tlrisk/io.hpp"

namespace tlrisk {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ConfigError("config is not valid JSON");
    return j;
}

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string("config is missing field '") + key + "'");
    return *it;
}

double number_field(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number())
        throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    if (!it->is_number())
        throw ConfigError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::size_t count_field(const json& j, const char* key) {
    double v = number_field(j, key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError(std::string("field '") + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
    return j.contains(key) ? count_field(j, key) : fallback;
}

Matrix parse_matrix_value(const json& v, const std::string& base_dir, std::size_t rows,
                          std::size_t cols, const char* key) {
    if (v.is_array()) {
        if (v.empty() || !v.front().is_array())
            throw ConfigError(std::string("field '") + key + "' must be a nested array");
        Matrix m(v.size(), v.front().size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const json& row = v[i];
            if (!row.is_array() || row.size() != m.cols())
                throw ConfigError(std::string("field '") + key + "' has ragged rows");
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (!row[j].is_number())
                    throw ConfigError(std::string("field '") + key + "' has a non-numeric entry");
                m(i, j) = row[j].get<double>();
            }
        }
        if ((rows != 0 && m.rows() != rows) || (cols != 0 && m.cols() != cols))
            throw ConfigError(std::string("field '") + key + "' has the wrong shape");
        return m;
    }
    if (v.is_object()) {
        if (v.contains("file")) {
            std::filesystem::path p(v["file"].get<std::string>());
            if (p.is_relative() && !base_dir.empty())
                p = std::filesystem::path(base_dir) / p;
            Matrix m = read_matrix_file(p.string());
            if ((rows != 0 && m.rows() != rows) || (cols != 0 && m.cols() != cols))
                throw ConfigError(std::string("matrix file for '") + key +
                                  "' has the wrong shape");
            return m;
        }
        if (v.contains("scaled_identity")) {
            if (rows != cols || rows == 0)
                throw ConfigError(std::string("field '") + key +
                                  "' cannot be a scaled identity here");
            return Matrix::identity(rows).scaled(v["scaled_identity"].get<double>());
        }
        if (v.contains("fill")) {
            if (rows == 0 || cols == 0)
                throw ConfigError(std::string("field '") + key + "' has no inferable shape");
            return Matrix(rows, cols, v["fill"].get<double>());
        }
    }
    throw ConfigError(std::string("field '") + key + "' is not a recognized matrix form");
}

ModelSpec parse_spec(const json& j, const std::string& base_dir) {
    if (!j.is_object())
        throw ConfigError("'spec' must be an object");
    std::string kind = require(j, "kind").get<std::string>();
    std::size_t input_dim = count_field(j, "input_dim");
    std::size_t output_dim = count_field(j, "output_dim");
    double noise = number_field(j, "noise_stddev");

    auto parse_cov = [&](const char* key) {
        if (!j.contains(key))
            return SymMatrix::identity(input_dim);
        return SymMatrix(parse_matrix_value(j[key], base_dir, input_dim, input_dim, key));
    };
    SymMatrix cov_s = parse_cov("cov_source");
    SymMatrix cov_t = parse_cov("cov_target");

    if (kind == "linear")
        return make_linear_spec(input_dim, output_dim, noise, cov_s, cov_t);

    std::size_t hidden = count_field(j, "hidden_width");
    if (kind == "net_fixed_output") {
        Matrix v = parse_matrix_value(require(j, "fixed_matrix"), base_dir, output_dim, hidden,
                                      "fixed_matrix");
        return make_fixed_output_spec(input_dim, output_dim, hidden, noise, cov_s, cov_t, v);
    }
    if (kind == "net_fixed_input") {
        Matrix w = parse_matrix_value(require(j, "fixed_matrix"), base_dir, hidden, input_dim,
                                      "fixed_matrix");
        return make_fixed_input_spec(input_dim, output_dim, hidden, noise, cov_s, cov_t, w);
    }
    throw ConfigError("unknown model kind: " + kind);
}

PairRecipe parse_recipe(const json& j) {
    if (!j.is_object())
        throw ConfigError("'recipe' must be an object");
    PairRecipe recipe;
    recipe.entry_variance = number_field(j, "entry_variance");
    recipe.perturbation_variance = number_or(j, "perturbation_variance", 0.0);
    recipe.scale = number_or(j, "scale", 1.0);
    recipe.base_seed = static_cast<std::uint64_t>(count_or(j, "base_seed", 0));
    if (j.contains("base_role")) {
        std::string role = j["base_role"].get<std::string>();
        if (role == "source")
            recipe.base_role = CovSide::Source;
        else if (role == "target")
            recipe.base_role = CovSide::Target;
        else
            throw ConfigError("base_role must be 'source' or 'target'");
    }
    return recipe;
}

LambdaPolicy parse_lambda_policy(const json& j) {
    LambdaPolicy policy;
    bool has_fixed = j.contains("lambda");
    bool has_grid = j.contains("lambda_grid");
    if (has_fixed == has_grid)
        throw ConfigError("provide exactly one of 'lambda' and 'lambda_grid'");
    if (has_fixed) {
        policy.fixed_weight = number_field(j, "lambda");
    } else {
        policy.use_grid = true;
        const json& grid = j["lambda_grid"];
        if (!grid.is_array() || grid.empty())
            throw ConfigError("'lambda_grid' must be a nonempty array");
        for (const json& v : grid) {
            if (!v.is_number())
                throw ConfigError("'lambda_grid' entries must be numbers");
            policy.grid.push_back(v.get<double>());
        }
        policy.n_validation = count_field(j, "n_validation");
    }
    return policy;
}

GdConfig parse_gd(const json& parent) {
    GdConfig gd;
    if (!parent.contains("gd"))
        return gd;
    const json& j = parent["gd"];
    if (!j.is_object())
        throw ConfigError("'gd' must be an object");
    gd.step_size = number_or(j, "step_size", gd.step_size);
    gd.max_iters = count_or(j, "max_iters", gd.max_iters);
    gd.rel_tol = number_or(j, "rel_tol", gd.rel_tol);
    gd.init_seed = static_cast<std::uint64_t>(count_or(j, "init_seed", 0));
    return gd;
}

json matrix_to_json(const Matrix& m) {
    // Exact scaled identities are written compactly; anything else inlines.
    bool scaled_id = m.rows() == m.cols() && !m.empty();
    double diag = scaled_id ? m(0, 0) : 0.0;
    for (std::size_t i = 0; scaled_id && i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != (i == j ? diag : 0.0)) {
                scaled_id = false;
                break;
            }
    if (scaled_id)
        return json{{"scaled_identity", diag}};
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

SweepConfig parse_sweep_config(const std::string& json_text, const std::string& base_dir) {
    json j = parse_json(json_text);
    SweepConfig config;
    config.spec = parse_spec(require(j, "spec"), base_dir);
    config.recipe = parse_recipe(require(j, "recipe"));

    std::string axis = require(j, "sweep_axis").get<std::string>();
    if (axis == "n_source")
        config.axis = SweepAxis::NSource;
    else if (axis == "n_target")
        config.axis = SweepAxis::NTarget;
    else if (axis == "delta_scale")
        config.axis = SweepAxis::DeltaScale;
    else
        throw ConfigError("unknown sweep_axis: " + axis);

    const json& values = require(j, "axis_values");
    if (!values.is_array())
        throw ConfigError("'axis_values' must be an array");
    for (const json& v : values) {
        if (!v.is_number())
            throw ConfigError("'axis_values' entries must be numbers");
        config.axis_values.push_back(v.get<double>());
    }

    const json& fixed = require(j, "fixed");
    if (!fixed.is_object())
        throw ConfigError("'fixed' must be an object");
    config.fixed_n_source = count_or(fixed, "n_source", 0);
    config.fixed_n_target = count_or(fixed, "n_target", 0);
    config.lambda_policy = parse_lambda_policy(fixed);

    config.trials = count_or(j, "trials", 1);
    config.n_test = count_or(j, "n_test", 200);
    config.master_seed = static_cast<std::uint64_t>(count_or(j, "master_seed", 0));
    config.output_path = require(j, "output_path").get<std::string>();
    config.gd = parse_gd(j);
    return config;
}

SimulateConfig parse_simulate_config(const std::string& json_text, const std::string& base_dir) {
    json j = parse_json(json_text);
    SimulateConfig config;
    config.spec = parse_spec(require(j, "spec"), base_dir);
    config.recipe = parse_recipe(require(j, "recipe"));
    config.n_source = count_or(j, "n_source", 0);
    config.n_target = count_field(j, "n_target");
    config.lambda_policy = parse_lambda_policy(j);
    config.n_test = count_or(j, "n_test", 200);
    config.seed = static_cast<std::uint64_t>(count_or(j, "seed", 0));
    config.gd = parse_gd(j);
    return config;
}

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string parent_dir(const std::string& path) {
    return std::filesystem::path(path).parent_path().string();
}

} // namespace

SweepConfig load_sweep_config(const std::string& path) {
    return parse_sweep_config(read_text_file(path), parent_dir(path));
}

SimulateConfig load_simulate_config(const std::string& path) {
    return parse_simulate_config(read_text_file(path), parent_dir(path));
}

ModelSpec parse_model_spec_json(const std::string& json_text, const std::string& base_dir) {
    json j = parse_json(json_text);
    return parse_spec(j.contains("spec") ? j["spec"] : j, base_dir);
}

ModelSpec load_model_spec(const std::string& path) {
    return parse_model_spec_json(read_text_file(path), parent_dir(path));
}

std::string resolved_sweep_json(const SweepConfig& config) {
    json spec;
    switch (config.spec.kind) {
        case ModelKind::Linear: spec["kind"] = "linear"; break;
        case ModelKind::NetFixedOutput: spec["kind"] = "net_fixed_output"; break;
        case ModelKind::NetFixedInput: spec["kind"] = "net_fixed_input"; break;
    }
    spec["input_dim"] = config.spec.input_dim;
    spec["output_dim"] = config.spec.output_dim;
    if (config.spec.kind != ModelKind::Linear) {
        spec["hidden_width"] = config.spec.hidden_width;
        spec["fixed_matrix"] = matrix_to_json(*config.spec.fixed_matrix);
    }
    spec["noise_stddev"] = config.spec.noise_stddev;
    spec["cov_source"] = matrix_to_json(config.spec.cov_source.full());
    spec["cov_target"] = matrix_to_json(config.spec.cov_target.full());

    json recipe;
    recipe["entry_variance"] = config.recipe.entry_variance;
    recipe["perturbation_variance"] = config.recipe.perturbation_variance;
    recipe["scale"] = config.recipe.scale;
    recipe["base_role"] = config.recipe.base_role == CovSide::Source ? "source" : "target";

    json fixed;
    fixed["n_source"] = config.fixed_n_source;
    fixed["n_target"] = config.fixed_n_target;
    if (config.lambda_policy.use_grid) {
        fixed["lambda_grid"] = config.lambda_policy.grid;
        fixed["n_validation"] = config.lambda_policy.n_validation;
    } else {
        fixed["lambda"] = config.lambda_policy.fixed_weight;
    }

    json root;
    root["spec"] = spec;
    root["recipe"] = recipe;
    switch (config.axis) {
        case SweepAxis::NSource: root["sweep_axis"] = "n_source"; break;
        case SweepAxis::NTarget: root["sweep_axis"] = "n_target"; break;
        case SweepAxis::DeltaScale: root["sweep_axis"] = "delta_scale"; break;
    }
    root["axis_values"] = config.axis_values;
    root["fixed"] = fixed;
    root["trials"] = config.trials;
    root["n_test"] = config.n_test;
    root["master_seed"] = config.master_seed;
    root["output_path"] = config.output_path;
    json gd;
    gd["step_size"] = config.gd.step_size;
    gd["max_iters"] = config.gd.max_iters;
    gd["rel_tol"] = config.gd.rel_tol;
    root["gd"] = gd;
    return root.dump(2);
}

} // namespace tlrisk
