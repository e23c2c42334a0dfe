#pragma once

// Fit of the free stiffness parameters to bend-test anchors, and the
// two-segment pivot experiment.

#include <cstdint>
#include <string>
#include <vector>

#include "vine/bending.hpp"
#include "vine/model.hpp"

namespace vine {

enum class PouchCondition { Unjammed, JammedAtmospheric, JammedVacuum };
enum class Observable {
  TipForce,          // N, at the anchor's condition
  JamRatioPercent,   // 100 * F(jammed at atmospheric) / F(unjammed)
  VacuumGapPercent,  // 100 * (F(vacuum) / F(atmospheric) - 1)
};

const char* to_string(PouchCondition c);
const char* to_string(Observable o);
PouchCondition pouch_condition_from_string(const std::string& s);
Observable observable_from_string(const std::string& s);

SectionState section_state(PouchCondition c, double internal_gauge);

struct CalibrationAnchor {
  double internal_gauge = 0.0;  // Pa
  PouchCondition condition = PouchCondition::Unjammed;
  Observable observable = Observable::TipForce;
  double value = 0.0;
  double displacement = 0.010;  // m
  double beam_length = 0.25;    // m

  bool operator==(const CalibrationAnchor&) const = default;
};

struct CalibrationAnchors {
  std::vector<CalibrationAnchor> anchors;
  // 1.07 N, 6.68 N, 663 %, 4.7 %, 2.1 %.
  static CalibrationAnchors reference();
};

// Model-side value of one anchor's observable.
double predict(const CalibrationAnchor& anchor, const ModelParameters& params,
               const RobotDescription& geometry = {});
// Relative residual; percent observables are compared in ratio form.
double relative_residual(const CalibrationAnchor& anchor, const ModelParameters& params,
                         const RobotDescription& geometry = {});

// Parameters not pinned down by the anchor set (empty if identifiable).
std::vector<std::string> deficient_parameters(const CalibrationAnchors& anchors);

struct FitOptions {
  std::uint64_t seed = 1;
  int jobs = 1;
  int max_iterations = 500;
  double jitter = 0.1;  // log-space jitter on the start grid
};

struct AnchorResidual {
  CalibrationAnchor anchor;
  double model_value = 0.0;
  double residual = 0.0;
};

struct CalibrationReport {
  ModelParameters parameters;
  std::vector<AnchorResidual> residuals;
  double objective = 0.0;
  int iterations = 0;
  int starts = 0;
  int best_start = -1;
  bool converged = false;
  std::vector<double> objective_trace;  // accepted iterations of the best start
  std::string weighting = "relative residuals; percent anchors in ratio form";
};

// Fits base_rigidity, rigidity_per_pascal, skin_gain and deltaP_sat; the rest
// of `initial` is kept. Throws CalibrationError on an underdetermined set.
CalibrationReport fit_parameters(const CalibrationAnchors& anchors, const RobotDescription& geometry,
                                 const ModelParameters& initial, const FitOptions& options = {});

// Jammed/unjammed force ratio at the given internal pressure (10 mm, 0.25 m).
double jam_force_ratio(const ModelParameters& params, double internal_gauge,
                       const RobotDescription& geometry = {});

struct TwoSegmentSample {
  double force = 0.0;   // N, transverse tip load
  double theta1 = 0.0;  // distal segment orientation, rad
  double theta2 = 0.0;  // proximal segment orientation, rad
};

enum class TwoSegmentBehaviour { Pivot, SingleUnit, Mixed, Unloaded };
const char* to_string(TwoSegmentBehaviour b);

struct TwoSegmentResult {
  std::vector<TwoSegmentSample> trace;
  TwoSegmentBehaviour behaviour = TwoSegmentBehaviour::Unloaded;
  double peak_ratio = 0.0;           // theta1 / theta2 at peak load
  double max_relative_spread = 0.0;  // max |theta1 - theta2| / |theta2|
};

struct TwoSegmentOptions {
  double internal_gauge = 6900.0;
  double max_force = 3.0;
  int steps = 30;
};

// `geometry` must have exactly two sections.
TwoSegmentResult virtual_two_segment_test(const RobotDescription& geometry,
                                          const ModelParameters& params, bool proximal_jammed,
                                          bool distal_jammed, const TwoSegmentOptions& options = {});

}  // namespace vine
