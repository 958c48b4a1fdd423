#pragma once

#include <span>
#include <utility>
#include <vector>

#include "stylize/image.hpp"

namespace stylize {

struct PatchRect {
    int x = 0, y = 0, w = 0, h = 0;
};

/// Grid of overlapping patch nodes with 4-neighborhood adjacency. Patches
/// are placed every `stride` pixels; a final row/column is clamped to the
/// image edge so every pixel is covered by at least one patch.
class PatchGrid {
public:
    PatchGrid(int image_width, int image_height, int patch_size, int stride);

    int patch_size() const { return patch_; }
    int stride() const { return stride_; }
    int cols() const { return static_cast<int>(xs_.size()); }
    int rows() const { return static_cast<int>(ys_.size()); }
    int nodes() const { return cols() * rows(); }

    PatchRect rect(int node) const;
    /// Tent-weight peak position of a node's patch.
    std::pair<int, int> center(int node) const;

    /// Directed-free edge list (a < b), fixed scan order: for each node its
    /// right neighbor then its down neighbor.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    /// Intersection of two adjacent nodes' patch rectangles.
    /// Throws if the nodes are not 4-neighbors.
    PatchRect overlap(int a, int b) const;

    /// Nodes whose patches contain the pixel (at most 4 for half-overlap).
    std::vector<int> covering_nodes(int x, int y) const;

private:
    int patch_ = 0, stride_ = 0;
    std::vector<int> xs_, ys_; // patch top-left coordinates per column/row
    std::vector<std::pair<int, int>> edges_;
};

/// Pearson correlation of two equal-size sample sets in [-1, 1].
/// If either set has variance below 1e-12 the result is 0.
double ncc(std::span<const float> a, std::span<const float> b);

struct DataTerm {
    double distance; // alpha*(1 - ncc) + (1-alpha)*mean-abs-difference
    double phi;      // exp(-distance^2 / (2*sigma_d^2))
};
DataTerm data_term(std::span<const float> input_patch,
                   std::span<const float> exemplar_patch,
                   double alpha = 0.8, double sigma_d = 0.5);

struct SmoothnessTerm {
    double cost; // mean squared difference over the overlap
    double psi;  // exp(-cost / (2*sigma_c^2))
};
SmoothnessTerm smoothness_term(std::span<const float> overlap_a,
                               std::span<const float> overlap_b,
                               double sigma_c = 1.0);

/// A pairwise-labeled grid problem: per-node unary potentials plus per-edge
/// K x K compatibility tables.
struct MrfProblem {
    int nodes = 0;
    int labels = 0;
    std::vector<double> unary; // nodes x labels, row-major

    struct Edge {
        int a, b;
        std::vector<double> psi; // labels x labels: psi[ka * K + kb]
    };
    std::vector<Edge> edges;

    double unary_at(int node, int label) const { return unary[static_cast<std::size_t>(node) * labels + label]; }
};

struct MatchParams {
    double alpha = 0.8;
    double sigma_d = 0.5;
    double sigma_c = 1.0;
};

/// Assemble the patch-selection problem for an input luma image and K warped
/// exemplar luma images: unaries from data_term at each node's patch,
/// pairwise tables from smoothness_term over neighbor overlaps.
MrfProblem build_patch_problem(const Image& input_luma,
                               const std::vector<Image>& exemplar_lumas,
                               const PatchGrid& grid,
                               const MatchParams& params = {});

struct BpOptions {
    int max_iters = 10;
    double tol = 1e-6; // max message change for early termination
};

/// Per-node label distributions plus the directed-edge messages that
/// produced them.
struct LabelBeliefs {
    int nodes = 0;
    int labels = 0;
    std::vector<double> beliefs;                // nodes x labels, rows sum to 1
    std::vector<std::vector<double>> messages;  // one K-vector per directed edge
    int iterations = 0;
    bool converged = false;
    int floor_warnings = 0; // unaries raised to the positivity floor

    double at(int node, int label) const { return beliefs[static_cast<std::size_t>(node) * labels + label]; }
};

/// Synchronous sum-product belief propagation. Messages are renormalized
/// after every update; beliefs are row-normalized products of the unary and
/// incoming messages. Deterministic for fixed inputs: fixed edge ordering
/// and summation order.
LabelBeliefs run_bp(const MrfProblem& problem, const BpOptions& options = {});

enum class SelectionMode { argmax, mmse };

/// Per-node exemplar choice. argmax keeps the max-belief label (ties to the
/// lower index); mmse keeps the full belief row for weighted blending.
struct LabelField {
    SelectionMode mode = SelectionMode::argmax;
    int labels = 0;
    std::vector<int> label;       // argmax label per node (both modes)
    std::vector<double> beliefs;  // nodes x labels (mmse blending weights)

    double belief_at(int node, int k) const { return beliefs[static_cast<std::size_t>(node) * labels + k]; }
};

LabelField select_labels(const LabelBeliefs& beliefs, SelectionMode mode);

/// Exact marginals by full joint enumeration; the independent reference for
/// run_bp. Rejects instances with more than 10^7 joint states.
std::vector<double> brute_force_marginals(const MrfProblem& problem);

} // namespace stylize
