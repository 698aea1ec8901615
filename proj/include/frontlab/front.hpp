#pragma once

#include "frontlab/grid.hpp"

#include <utility>
#include <vector>

namespace frontlab {

// Time series of the level-crossing front location X_lambda(t).
struct FrontTrace {
    double level = 0.5;
    std::vector<std::pair<double, double>> samples; // (t, X), t strictly increasing
};

// d(t) = sqrt(2) t - X_lambda(t).
struct DelaySeries {
    std::vector<std::pair<double, double>> samples; // (t, d)
};

enum class DelayModel { Log, Power };

// Fitted delay model: Log d ~ c ln t + b, Power d ~ a t^beta + b.
struct FitReport {
    DelayModel model = DelayModel::Log;
    double c = 0.0;
    double a = 0.0;
    double beta = 0.0;
    double b = 0.0;
    double rms_residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool preferred = false;
};

enum class ModelPreference { Log, Power, Inconclusive };

struct ModelSelection {
    FitReport log_fit;
    FitReport power_fit;
    ModelPreference preference = ModelPreference::Inconclusive;
};

// Largest x where the linearly interpolated field crosses `level` downward,
// scanning from the right edge. Throws when there is no such crossing.
double front_location(const ScalarField& field, double level);

DelaySeries delay_series(const FrontTrace& trace);

FitReport fit_log(const DelaySeries& series, double t_min, double t_max);

// Nonlinear fit by profiling the offset b over a grid (with golden-section
// refinement) and regressing ln(d-b) on ln t at each candidate. The offset
// grid spans [min d - 2 (max-min), min d), which keeps a near-degenerate
// power law from impersonating a logarithm.
FitReport fit_power(const DelaySeries& series, double t_min, double t_max);

// Runs both fits; prefers the model whose RMS residual is smaller by at
// least a 20% margin, otherwise reports Inconclusive.
ModelSelection model_select(const DelaySeries& series, double t_min, double t_max);

// Linear regression slope of X(t) against t over the window.
double speed_estimate(const FrontTrace& trace, double t_min, double t_max);

// t * u(t, sqrt(2) t + log(t)/(2 sqrt 2)): bounded in t when the solution
// decays ahead of the front at the 1/t rate. `amplitude_bound` is the sup
// of u0 (the probe is defined for t >= max(amplitude_bound/(sqrt 2 - 1), 1)).
double ahead_of_front_probe(const ScalarField& field, double amplitude_bound);

} // namespace frontlab
