#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace olymp::stgcn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kDefaultHidden = 32;
inline constexpr int kOutputs = 3;  ///< gold, silver, bronze
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kLayerNormEps = 1e-5;

struct Edge {
    int src = 0;
    int dst = 0;
    double weight = 1.0;
};

/// Country graph over T time steps. features[t] is N x F with the same node
/// order at every step.
struct CountryGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::vector<MatrixXd> features;

    int n() const { return static_cast<int>(nodes.size()); }
    int steps() const { return static_cast<int>(features.size()); }
    int width() const { return features.empty() ? 0 : static_cast<int>(features.front().cols()); }
    /// Throws DomainError on bad indices, non-finite weights, duplicate edges or ragged features.
    void validate() const;
};

/// Edge list with a self-loop of weight 1 added for every node lacking one.
std::vector<Edge> with_self_loops(const std::vector<Edge>& edges, int n);

/// Named parameter tensors in a fixed order. Gradients use the same layout.
struct ModelParams {
    int features = 0;
    int hidden = kDefaultHidden;
    std::vector<std::string> names;
    std::vector<MatrixXd> tensors;

    static ModelParams zeros(int features, int hidden = kDefaultHidden);
    /// Glorot-uniform weights from the seeded stream; biases 0, layer-norm gains 1.
    static ModelParams init(int features, int hidden, std::uint64_t seed);

    MatrixXd& operator[](const std::string& name);
    const MatrixXd& operator[](const std::string& name) const;
    std::size_t index(const std::string& name) const;
    /// Tensors subject to the L1/L2 penalty (weights, not biases or layer-norm parameters).
    bool penalized(std::size_t i) const;
    std::size_t size() const;  ///< total scalar count
    void validate() const;
};


/// One attention layer applied to node states h (N x H) at one time step.
/// Returns h + dropout(layernorm(swish(sum_j alpha_ij h_j W + b))).
/// `attention`, when given, receives alpha per edge of with_self_loops(edges).
MatrixXd gat_layer(const MatrixXd& h, const std::vector<Edge>& edges, const ModelParams& p, int layer,
                   std::vector<double>* attention = nullptr);

/// Input projection and both attention layers for one time step (no dropout).
MatrixXd gat_forward(const MatrixXd& x, const std::vector<Edge>& edges, const ModelParams& p);

/// Bidirectional LSTM over a sequence of N x H inputs; returns N x 2H per step
/// (forward state, then backward state).
std::vector<MatrixXd> bilstm_forward(const std::vector<MatrixXd>& seq, const ModelParams& p);

/// Attention over time steps of the BiLSTM output, sigmoid fusion gate with the
/// last graph embedding, softplus head. Returns N x 3.
MatrixXd fuse_and_predict(const MatrixXd& graph_last, const std::vector<MatrixXd>& temporal, const ModelParams& p,
                          MatrixXd* gate = nullptr);

/// Full forward pass in inference mode.
MatrixXd predict(const CountryGraph& g, const ModelParams& p);

struct LossConfig {
    double l1 = 0.0;
    double l2 = 0.0;
    double dropout = 0.0;
};

struct LossAndGrad {
    double loss = 0.0;
    double mse = 0.0;
    std::vector<MatrixXd> grad;  ///< same layout as ModelParams::tensors
};

/// MSE over the N x 3 targets plus l1 |W|_1 + l2 |W|_2^2 and its exact gradient.
/// Dropout masks (train mode) are drawn from `dropout_seed` when dropout > 0.
LossAndGrad loss_and_gradient(const CountryGraph& g, const MatrixXd& targets, const ModelParams& p,
                              const LossConfig& cfg, std::uint64_t dropout_seed = 0);

double loss_value(const CountryGraph& g, const MatrixXd& targets, const ModelParams& p, const LossConfig& cfg);

/// Versioned text checkpoint: "olymp-stgcn 1", "features F hidden H tensors K",
/// then per tensor "name rows cols" and one row of values per line.
void save_checkpoint(const ModelParams& p, std::ostream& out);
ModelParams load_checkpoint(std::istream& in);

} // namespace olymp::stgcn
