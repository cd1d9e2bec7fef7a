#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyncal/sensor_model.hpp"
#include "dyncal/tic_network.hpp"
#include "dyncal/weights.hpp"

namespace dyncal {

struct SensorEstimate {
  Rotation delta_drift;
  Rotation delta_offset;
  double residual = 0.0;               ///< sum of squared Frobenius errors
  std::vector<double> residual_history;  ///< per iteration (Procrustes only)
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;
};

/// Estimated corrections (delta drift, delta offset) for every sensor.
struct EstimateOut {
  std::vector<SensorEstimate> sensors;
  int iterations = 0;  ///< max over sensors
};

/// Ground-truth companion of a window: the bone-frame readings (R_GB, a_G)
/// and the true parameters at the newest frame.
struct GroundTruthWindow {
  Window bones;
  std::vector<SensorCalib> params;
};

/// Optional side information; only the oracle and Procrustes estimators
/// read it.
struct EstimateContext {
  const GroundTruthWindow* truth = nullptr;
  const CalibState* state = nullptr;
};

/// Maps a drift/offset-removed window to (delta drift, delta offset) per
/// sensor. Implementations are immutable and safe to share across threads.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual EstimateOut estimate(const Window& window, const EstimateContext& ctx) const = 0;
};

/// Throws DataError unless the window has >= 2 frames of equal sensor count
/// and valid rotations.
void validate_window(const Window& window);

// ---------------------------------------------------------------------------
// Ground-truth oracle

/// Exact deltas so that drift * delta_drift and delta_offset * offset equal
/// the true parameters.
EstimateOut oracle_estimate(const Window& window, const GroundTruthWindow& gt,
                            const CalibState& state);

class OracleEstimator final : public Estimator {
 public:
  std::string name() const override { return "oracle"; }
  EstimateOut estimate(const Window& window, const EstimateContext& ctx) const override;
};

// ---------------------------------------------------------------------------
// Alternating orthogonal Procrustes

struct ProcrustesOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;  ///< stop when the residual changes by less
  /// Per-sensor starting offsets; when absent an axis-alignment solve seeds
  /// the iteration.
  std::optional<std::vector<Rotation>> initial_offsets;
  /// Re-estimate the drift tilt from mean gravity leakage.
  bool gravity_refinement = false;
  double low_motion_accel = 1.0;  ///< m/s^2, frames below are "low motion"
  GravitySpec gravity;
};

/// argmax_R tr(R^T m) over SO(3): U diag(1, 1, det(U V^T)) V^T.
Rotation kabsch(const Eigen::Matrix3d& m);

/// Minimal rotation taking `from` onto the direction of `to`.
Rotation align_vectors(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

/// Drift tilt implied by the mean leakage residual
/// mean(measured - drift_estimate * reference) over low-motion frames: the
/// minimal rotation from g to g - residual. Empty when no frame qualifies.
std::optional<Rotation> leakage_tilt(std::span<const Eigen::Vector3d> measured_accel,
                                     std::span<const Eigen::Vector3d> reference_accel,
                                     const Rotation& drift_estimate,
                                     const ProcrustesOptions& opts = {});

/// Per sensor, minimises sum_t ||X R_ref(t) Y - R_meas(t)||_F^2 over
/// rotations X (delta drift) and Y (delta offset).
EstimateOut procrustes_estimate(const Window& window, const Window& reference,
                                const ProcrustesOptions& opts = {});

class ProcrustesEstimator final : public Estimator {
 public:
  explicit ProcrustesEstimator(ProcrustesOptions opts = {}) : opts_(std::move(opts)) {}
  std::string name() const override { return "procrustes"; }
  EstimateOut estimate(const Window& window, const EstimateContext& ctx) const override;

 private:
  ProcrustesOptions opts_;
};

// ---------------------------------------------------------------------------
// Transformer inference

/// Gram-Schmidt decode of the raw head outputs.
EstimateOut decode_tic_output(const TicRawOutput& raw, std::size_t sensors);

EstimateOut tic_forward(const Window& window, const TicNetwork& network);
EstimateOut tic_forward(const Window& window, const WeightBundle& weights);

class TicEstimator final : public Estimator {
 public:
  explicit TicEstimator(std::shared_ptr<const TicNetwork> network) : network_(std::move(network)) {}
  std::string name() const override { return "tic"; }
  EstimateOut estimate(const Window& window, const EstimateContext& ctx) const override;

  const TicNetwork& network() const { return *network_; }

 private:
  std::shared_ptr<const TicNetwork> network_;
};

}  // namespace dyncal
