#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dunkl/model.hpp"
#include "dunkl/scheme.hpp"

namespace dunkl {

enum class ExperimentKind { simulate, convergence, moments, increments, chamber_exit, cir_check, validate };

const char* to_string(ExperimentKind k);

struct CirParams {
    double sigma = 1.0;
    double lambda = 0.0;
    double k = 1.0;
    double xi = 1.0;
    double T = 1.0;
};

/// A fully validated experiment file.
struct ExperimentConfig {
    /// Canonical JSON text of the input, echoed into every summary.
    std::string echo;

    std::optional<ModelSpec> model;
    SchemeConfig scheme;
    ExperimentKind kind = ExperimentKind::simulate;

    // experiment parameters
    double p = 2.0;
    std::vector<double> taus;
    CirParams cir;
    int samples = 256;
    double tol = 1e-9;

    // run block
    int paths = 0;
    int n = 0;
    std::vector<int> n_list;
    int n_ref = 0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int threads = 1;
    bool allow_assumption_violation = false;
};

/// Parses JSON text.  Unknown keys, missing fields and out-of-range values are
/// all collected and thrown together as ConfigError.
ExperimentConfig parse_config(std::string_view text);

}  // namespace dunkl
