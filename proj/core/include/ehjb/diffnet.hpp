#ifndef EHJB_DIFFNET_HPP
#define EHJB_DIFFNET_HPP

// Fully-connected tanh value network with exact propagation of the value,
// input gradient and input Hessian ("jet"), plus reverse-mode gradients of
// any scalar built from recorded jets with respect to the network parameters.

#include <cstdint>
#include <utility>
#include <vector>

#include "ehjb/common.hpp"

namespace ehjb {

/// Weights and biases of v(x). Hidden layers use tanh, the output layer is
/// affine. layer_sizes = [d, w_1, ..., w_L, 1].
struct MlpParams {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;  // out x in
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t seed = 0;

  int input_dim() const { return layer_sizes.front(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t num_parameters() const;
  /// Shape and finiteness check; throws ConfigError.
  void validate() const;
};

/// Parameter-shaped tensors: gradients and optimizer state.
struct ParamGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static ParamGrad zeros_like(const MlpParams& params);
  ParamGrad& operator+=(const ParamGrad& other);
  ParamGrad& operator*=(double s);
  bool same_shape(const MlpParams& params) const;
};

void validate_layer_sizes(const std::vector<int>& layer_sizes);

/// Uniform weights on [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
MlpParams init_network(std::uint64_t seed, std::vector<int> layer_sizes);

/// v, grad v and the symmetric Hessian of v at one point.
struct EvalJet {
  double value = 0.0;
  Vec gradient;
  Eigen::MatrixXd hessian;

  double laplacian() const { return hessian.trace(); }
};

/// Which second-order channels are propagated. Diagonal is sufficient for the
/// Laplacian; None carries value and gradient only.
enum class HessianMode { Full, Diagonal, None };

/// Channel bookkeeping for a batched jet: channel 0 is the value, channels
/// 1..d the gradient, followed by one channel per tracked Hessian entry.
class JetLayout {
 public:
  JetLayout() = default;
  JetLayout(int dim, HessianMode mode);

  int dim() const noexcept { return dim_; }
  HessianMode mode() const noexcept { return mode_; }
  int channels() const noexcept { return 1 + dim_ + static_cast<int>(pairs_.size()); }
  int grad_channel(int k) const noexcept { return 1 + k; }
  int hess_channel(int pair) const noexcept { return 1 + dim_ + pair; }
  const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }
  /// Channel index of H_kk, or -1 when the mode does not track it.
  int diag_channel(int k) const noexcept;

 private:
  int dim_ = 0;
  HessianMode mode_ = HessianMode::Full;
  std::vector<std::pair<int, int>> pairs_;  // (k, l), k <= l
  std::vector<int> diag_;
};

/// Jets of a batch of N points. channels is N x C (one column per channel).
struct BatchJet {
  JetLayout layout;
  Eigen::MatrixXd channels;

  int size() const { return static_cast<int>(channels.rows()); }
  double value(int i) const { return channels(i, 0); }
  Vec gradient(int i) const;
  double laplacian(int i) const;
  Vec laplacians() const;
  /// Full-mode batches only.
  EvalJet point(int i) const;
};

/// Record of one or more batched network evaluations, at matrix granularity
/// (one node per affine or tanh stage), terminated by a scalar whose partial
/// derivatives with respect to the recorded output channels are supplied by
/// the caller.
class Tape {
 public:
  struct Stage {
    enum class Kind { Affine, Tanh };
    Kind kind;
    int layer;
    Eigen::MatrixXd input;       // stacked channels, rows = layer width, cols = C*N
    Eigen::MatrixXd aux;         // Affine: W. Tanh: tanh of the value block, width x N.
    Eigen::VectorXd bias;        // Affine only.
  };
  struct Segment {
    JetLayout layout;
    int n_points = 0;
    std::vector<Stage> stages;
    Eigen::MatrixXd output;      // N x C
    Eigen::MatrixXd adjoint;     // N x C, d(scalar)/d(output); empty = zero
  };

  std::size_t num_segments() const noexcept { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_.at(i); }
  const std::vector<int>& layer_sizes() const noexcept { return layer_sizes_; }

  /// Sets d(scalar)/d(output channels) for a recorded segment (N x C).
  void set_output_adjoint(std::size_t segment, Eigen::MatrixXd adjoint);
  /// Seals the tape with the value of the scalar it computes.
  void terminate(double scalar);
  bool terminated() const noexcept { return terminated_; }
  double scalar() const;

  /// Re-executes every recorded segment from its recorded input stack using
  /// the weights stored on the tape.
  std::vector<BatchJet> replay() const;

  void clear();

  // Used by the forward pass.
  std::size_t begin_segment(const std::vector<int>& layer_sizes, const JetLayout& layout, int n_points);
  Segment& mutable_segment(std::size_t i) { return segments_.at(i); }

 private:
  std::vector<int> layer_sizes_;
  std::vector<Segment> segments_;
  bool terminated_ = false;
  double scalar_ = 0.0;
};

/// Batched jets at the columns of `points` (d x N).
BatchJet forward_jet_batch(const MlpParams& params, const Eigen::Ref<const Points>& points,
                           HessianMode mode, Tape* tape = nullptr);

/// Exact v, grad v, Hessian at x (symmetric by construction).
EvalJet forward_jet(const MlpParams& params, const Eigen::Ref<const Vec>& x, Tape* tape = nullptr);

/// Plain network values at the columns of `points`.
Vec forward_values(const MlpParams& params, const Eigen::Ref<const Points>& points);
double forward_value(const MlpParams& params, const Eigen::Ref<const Vec>& x);

/// Converts d(scalar)/d(EvalJet) into a 1 x C segment adjoint (Full layout).
Eigen::MatrixXd jet_adjoint(const JetLayout& layout, double d_value, const Vec& d_gradient,
                            const Eigen::MatrixXd& d_hessian);

/// d(scalar)/d(parameters) by reverse accumulation over the tape, times seed.
ParamGrad backward(const Tape& tape, double seed_value = 1.0);

}  // namespace ehjb

#endif  // EHJB_DIFFNET_HPP
