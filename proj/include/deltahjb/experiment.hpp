#pragma once

#include "deltahjb/models.hpp"
#include "deltahjb/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deltahjb {

enum class Problem { HestonInvestment, ReinsuranceHeston, ReinsuranceRough, SlvStopping };

std::string to_string(Problem p);
Problem parse_problem(const std::string& name);

struct RoughSpec {
    double alpha = 0.6;
    int factors = 3;
    double gamma_max = 50.0;
    // When non-empty these replace the geometric-cell construction.
    std::vector<double> weights;
    std::vector<double> rates;
};

struct SlvSpec {
    std::string preset = "heston";
    SLVPresetParams params;
    double s_ref = 1.0;  // s used for the printed value surface
};

struct ExperimentConfig {
    Problem problem = Problem::HestonInvestment;
    PowerUtility utility;
    HestonParams heston;
    std::optional<ReinsuranceParams> reinsurance;
    std::optional<RoughSpec> rough;
    std::optional<SlvSpec> slv;

    SolverConfig solver;
    std::vector<std::pair<double, double>> box;     // as given (empty if derived from window)
    std::vector<std::pair<double, double>> window;  // interior window where errors and surfaces are reported

    std::vector<int> table1_orders{6, 8, 10};
    int surface_points = 21;

    int retain_every = 1;
    bool psi_without_h = false;
    double stop_fraction = 1e-2;
    int boundary_points = 20;

    double initial_wealth = 1.5;  // before any reinsurance conversion
    std::vector<double> initial_factors;
    int sim_steps = 500;
    long long sim_paths = 10;
    long long mc_paths = 0;
    int mc_steps = 500;

    bool closed_form_oracle = true;
    std::string output = "out";
    std::uint64_t seed = 20240901;

    /// Interval list of the report window (window if set, else the box).
    std::vector<std::pair<double, double>> report_window() const;
};

/// Throws InputError naming the first missing or invalid field.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

ControlledGenerator build_generator(const ExperimentConfig& cfg);
RoughKernelApprox build_kernel(const ExperimentConfig& cfg);

/// Wealth at t = 0 after the reinsurance conversion (unchanged otherwise).
double converted_initial_wealth(const ExperimentConfig& cfg);

/// Each runner writes CSV artifacts plus manifest.json into `out` and returns an exit status.
int run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out);
int run_table1(const ExperimentConfig& cfg, const std::filesystem::path& out);
int run_stopping(const ExperimentConfig& cfg, const std::filesystem::path& out);
int run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct Table1Row {
    int M;
    bool available;
    double value_err;
    double strategy_err;
    double seconds;
};

/// Max value and strategy errors of V(0, .) against the Riccati oracle over the window grid.
std::pair<double, double> oracle_errors(const ValueSolution& sol, double p, const HestonParams& params,
                                        const std::vector<std::pair<double, double>>& window, int points);

std::vector<Table1Row> table1(const ExperimentConfig& cfg);

}  // namespace deltahjb
