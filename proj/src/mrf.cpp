#include "stylize/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stylize {

namespace {

std::vector<int> node_positions(int image_extent, int patch, int stride) {
    std::vector<int> pos;
    for (int p = 0; p + patch <= image_extent; p += stride) pos.push_back(p);
    if (pos.back() + patch < image_extent) pos.push_back(image_extent - patch);
    return pos;
}

} // namespace

PatchGrid::PatchGrid(int image_width, int image_height, int patch_size, int stride) {
    if (patch_size < 2 || stride < 1 || stride > patch_size)
        throw std::invalid_argument("PatchGrid: need 1 <= stride <= patch_size, patch_size >= 2");
    if (image_width < patch_size || image_height < patch_size)
        throw std::invalid_argument("PatchGrid: image smaller than patch size");
    patch_ = patch_size;
    stride_ = stride;
    xs_ = node_positions(image_width, patch_size, stride);
    ys_ = node_positions(image_height, patch_size, stride);

    const int nc = cols();
    for (int gy = 0; gy < rows(); ++gy) {
        for (int gx = 0; gx < nc; ++gx) {
            const int node = gy * nc + gx;
            if (gx + 1 < nc) edges_.emplace_back(node, node + 1);
            if (gy + 1 < rows()) edges_.emplace_back(node, node + nc);
        }
    }
}

PatchRect PatchGrid::rect(int node) const {
    const int gx = node % cols();
    const int gy = node / cols();
    return {xs_[gx], ys_[gy], patch_, patch_};
}

std::pair<int, int> PatchGrid::center(int node) const {
    const PatchRect r = rect(node);
    return {r.x + patch_ / 2, r.y + patch_ / 2};
}

PatchRect PatchGrid::overlap(int a, int b) const {
    const int gxa = a % cols(), gya = a / cols();
    const int gxb = b % cols(), gyb = b / cols();
    const bool adjacent = std::abs(gxa - gxb) + std::abs(gya - gyb) == 1;
    if (!adjacent)
        throw std::invalid_argument("PatchGrid::overlap: nodes are not 4-neighbors");
    const PatchRect ra = rect(a), rb = rect(b);
    const int x0 = std::max(ra.x, rb.x);
    const int y0 = std::max(ra.y, rb.y);
    const int x1 = std::min(ra.x + ra.w, rb.x + rb.w);
    const int y1 = std::min(ra.y + ra.h, rb.y + rb.h);
    if (x1 <= x0 || y1 <= y0)
        throw std::invalid_argument("PatchGrid::overlap: adjacent patches do not overlap");
    return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<int> PatchGrid::covering_nodes(int x, int y) const {
    std::vector<int> out;
    for (int gy = 0; gy < rows(); ++gy) {
        if (y < ys_[gy] || y >= ys_[gy] + patch_) continue;
        for (int gx = 0; gx < cols(); ++gx) {
            if (x < xs_[gx] || x >= xs_[gx] + patch_) continue;
            out.push_back(gy * cols() + gx);
        }
    }
    return out;
}

double ncc(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("ncc: patch sizes differ");
    const double n = static_cast<double>(a.size());
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum_a += a[i];
        sum_b += b[i];
    }
    const double mean_a = sum_a / n;
    const double mean_b = sum_b / n;
    double var_a = 0.0, var_b = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    var_a /= n;
    var_b /= n;
    cov /= n;
    if (var_a < 1e-12 || var_b < 1e-12) return 0.0;
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

DataTerm data_term(std::span<const float> input_patch,
                   std::span<const float> exemplar_patch,
                   double alpha, double sigma_d) {
    if (input_patch.size() != exemplar_patch.size() || input_patch.empty())
        throw std::invalid_argument("data_term: patch sizes differ");
    const double d_ncc = ncc(input_patch, exemplar_patch);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < input_patch.size(); ++i)
        abs_sum += std::abs(input_patch[i] - exemplar_patch[i]);
    const double d_abs = abs_sum / static_cast<double>(input_patch.size());
    const double d = alpha * (1.0 - d_ncc) + (1.0 - alpha) * d_abs;
    return {d, std::exp(-(d * d) / (2.0 * sigma_d * sigma_d))};
}

SmoothnessTerm smoothness_term(std::span<const float> overlap_a,
                               std::span<const float> overlap_b,
                               double sigma_c) {
    if (overlap_a.size() != overlap_b.size() || overlap_a.empty())
        throw std::invalid_argument("smoothness_term: overlap sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < overlap_a.size(); ++i) {
        const double d = static_cast<double>(overlap_a[i]) - overlap_b[i];
        acc += d * d;
    }
    const double cost = acc / static_cast<double>(overlap_a.size());
    return {cost, std::exp(-cost / (2.0 * sigma_c * sigma_c))};
}

namespace {

std::vector<float> extract_patch(const Image& img, const PatchRect& r) {
    std::vector<float> out(static_cast<std::size_t>(r.w) * r.h);
    auto plane = img.plane(0);
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
            out[static_cast<std::size_t>(y) * r.w + x] =
                plane[static_cast<std::size_t>(r.y + y) * img.width() + (r.x + x)];
    return out;
}

} // namespace

MrfProblem build_patch_problem(const Image& input_luma,
                               const std::vector<Image>& exemplar_lumas,
                               const PatchGrid& grid,
                               const MatchParams& params) {
    if (exemplar_lumas.empty())
        throw std::invalid_argument("build_patch_problem: no exemplars");
    for (const Image& e : exemplar_lumas)
        if (!e.same_shape(input_luma))
            throw std::invalid_argument("build_patch_problem: exemplar not in the input frame");

    const int k = static_cast<int>(exemplar_lumas.size());
    MrfProblem problem;
    problem.nodes = grid.nodes();
    problem.labels = k;
    problem.unary.resize(static_cast<std::size_t>(problem.nodes) * k);

    for (int node = 0; node < problem.nodes; ++node) {
        const PatchRect r = grid.rect(node);
        const auto t = extract_patch(input_luma, r);
        for (int label = 0; label < k; ++label) {
            const auto e = extract_patch(exemplar_lumas[label], r);
            problem.unary[static_cast<std::size_t>(node) * k + label] =
                data_term(t, e, params.alpha, params.sigma_d).phi;
        }
    }

    for (const auto& [a, b] : grid.edges()) {
        MrfProblem::Edge edge;
        edge.a = a;
        edge.b = b;
        edge.psi.resize(static_cast<std::size_t>(k) * k);
        const PatchRect omega = grid.overlap(a, b);
        std::vector<std::vector<float>> patches(k);
        for (int label = 0; label < k; ++label)
            patches[label] = extract_patch(exemplar_lumas[label], omega);
        for (int ka = 0; ka < k; ++ka)
            for (int kb = 0; kb < k; ++kb)
                edge.psi[static_cast<std::size_t>(ka) * k + kb] =
                    smoothness_term(patches[ka], patches[kb], params.sigma_c).psi;
        problem.edges.push_back(std::move(edge));
    }
    return problem;
}

namespace {

constexpr double kUnaryFloor = 1e-300;

void normalize_row(std::span<double> row) {
    double sum = 0.0;
    for (double v : row) sum += v;
    if (sum <= 0.0) {
        const double u = 1.0 / static_cast<double>(row.size());
        for (double& v : row) v = u;
    } else {
        for (double& v : row) v /= sum;
    }
}

} // namespace

LabelBeliefs run_bp(const MrfProblem& problem, const BpOptions& options) {
    if (options.max_iters < 1)
        throw std::invalid_argument("run_bp: need at least one iteration");
    const int n = problem.nodes;
    const int k = problem.labels;
    if (n <= 0 || k <= 0)
        throw std::invalid_argument("run_bp: empty problem");

    LabelBeliefs result;
    result.nodes = n;
    result.labels = k;

    std::vector<double> unary = problem.unary;
    for (double& u : unary) {
        if (u < kUnaryFloor) {
            u = kUnaryFloor;
            ++result.floor_warnings;
        }
    }

    // Directed edges: 2*i is a->b of the undirected edge i, 2*i+1 is b->a.
    const int m = static_cast<int>(problem.edges.size());
    std::vector<std::vector<double>> msg(2 * m, std::vector<double>(k, 1.0 / k));
    std::vector<std::vector<double>> next(2 * m, std::vector<double>(k));

    // Incoming directed-edge indices per node.
    std::vector<std::vector<int>> incoming(n);
    for (int e = 0; e < m; ++e) {
        incoming[problem.edges[e].b].push_back(2 * e);
        incoming[problem.edges[e].a].push_back(2 * e + 1);
    }

    auto psi_at = [&](int e, int ka, int kb) {
        return problem.edges[e].psi[static_cast<std::size_t>(ka) * k + kb];
    };

    // Product of messages into `node` excluding the one arriving over
    // directed edge `skip`, times the node's unary, for label j.
    auto cavity = [&](int node, int skip, int j) {
        double p = unary[static_cast<std::size_t>(node) * k + j];
        for (int in : incoming[node])
            if (in != skip) p *= msg[in][j];
        return p;
    };

    double max_change = 0.0;
    for (int iter = 0; iter < options.max_iters; ++iter) {
        for (int e = 0; e < m; ++e) {
            const int a = problem.edges[e].a;
            const int b = problem.edges[e].b;
            // a -> b: marginalize over a's labels.
            for (int kb = 0; kb < k; ++kb) {
                double acc = 0.0;
                for (int ka = 0; ka < k; ++ka)
                    acc += psi_at(e, ka, kb) * cavity(a, 2 * e + 1, ka);
                next[2 * e][kb] = acc;
            }
            normalize_row(next[2 * e]);
            // b -> a: marginalize over b's labels.
            for (int ka = 0; ka < k; ++ka) {
                double acc = 0.0;
                for (int kb = 0; kb < k; ++kb)
                    acc += psi_at(e, ka, kb) * cavity(b, 2 * e, kb);
                next[2 * e + 1][ka] = acc;
            }
            normalize_row(next[2 * e + 1]);
        }
        max_change = 0.0;
        for (int d = 0; d < 2 * m; ++d)
            for (int j = 0; j < k; ++j)
                max_change = std::max(max_change, std::abs(next[d][j] - msg[d][j]));
        msg.swap(next);
        result.iterations = iter + 1;
        if (max_change < options.tol) {
            result.converged = true;
            break;
        }
    }
    if (m == 0) result.converged = true;

    result.beliefs.resize(static_cast<std::size_t>(n) * k);
    for (int node = 0; node < n; ++node) {
        std::span<double> row{result.beliefs.data() + static_cast<std::size_t>(node) * k,
                              static_cast<std::size_t>(k)};
        for (int j = 0; j < k; ++j) row[j] = cavity(node, -1, j);
        normalize_row(row);
    }
    result.messages = std::move(msg);
    return result;
}

LabelField select_labels(const LabelBeliefs& beliefs, SelectionMode mode) {
    LabelField field;
    field.mode = mode;
    field.labels = beliefs.labels;
    field.label.resize(beliefs.nodes);
    for (int node = 0; node < beliefs.nodes; ++node) {
        int best = 0;
        double best_v = beliefs.at(node, 0);
        for (int j = 1; j < beliefs.labels; ++j) {
            const double v = beliefs.at(node, j);
            if (v > best_v) { // ties keep the lower index
                best_v = v;
                best = j;
            }
        }
        field.label[node] = best;
    }
    if (mode == SelectionMode::mmse) field.beliefs = beliefs.beliefs;
    return field;
}

std::vector<double> brute_force_marginals(const MrfProblem& problem) {
    const int n = problem.nodes;
    const int k = problem.labels;
    double states = 1.0;
    for (int i = 0; i < n; ++i) {
        states *= k;
        if (states > 1e7)
            throw std::invalid_argument(
                "brute_force_marginals: more than 1e7 joint states (K^N bound)");
    }

    std::vector<double> marginals(static_cast<std::size_t>(n) * k, 0.0);
    std::vector<int> assignment(n, 0);
    double total = 0.0;
    while (true) {
        double p = 1.0;
        for (int node = 0; node < n; ++node)
            p *= problem.unary_at(node, assignment[node]);
        for (const auto& e : problem.edges)
            p *= e.psi[static_cast<std::size_t>(assignment[e.a]) * k + assignment[e.b]];
        total += p;
        for (int node = 0; node < n; ++node)
            marginals[static_cast<std::size_t>(node) * k + assignment[node]] += p;

        int pos = n - 1;
        while (pos >= 0 && assignment[pos] == k - 1) assignment[pos--] = 0;
        if (pos < 0) break;
        ++assignment[pos];
    }
    if (total > 0.0)
        for (double& v : marginals) v /= total;
    return marginals;
}

} // namespace stylize
