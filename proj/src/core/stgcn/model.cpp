#include "stgcn/model.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace olymp::stgcn {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

MatrixXd sigmoid(const MatrixXd& m) { return m.unaryExpr([](double v) { return sigmoid(v); }); }

struct Shape {
    std::string name;
    int rows;
    int cols;
};

std::vector<Shape> layout(int f, int h) {
    std::vector<Shape> s{{"input.W", f, h}, {"input.b", 1, h}};
    for (int l = 0; l < 2; ++l) {
        const std::string p = "gat" + std::to_string(l) + ".";
        s.push_back({p + "W", h, h});
        s.push_back({p + "a_src", h, 1});
        s.push_back({p + "a_dst", h, 1});
        s.push_back({p + "a_edge", 1, 1});
        s.push_back({p + "b", 1, h});
        s.push_back({p + "ln_gain", 1, h});
        s.push_back({p + "ln_bias", 1, h});
    }
    for (const std::string d : {"lstm_f.", "lstm_b."}) {
        s.push_back({d + "Wx", h, 4 * h});
        s.push_back({d + "Wh", h, 4 * h});
        s.push_back({d + "b", 1, 4 * h});
    }
    s.push_back({"attn.W", 2 * h, h});
    s.push_back({"attn.b", 1, h});
    s.push_back({"attn.v", h, 1});
    s.push_back({"temporal.W", 2 * h, h});
    s.push_back({"temporal.b", 1, h});
    s.push_back({"gate.W", 2 * h, h});
    s.push_back({"gate.b", 1, h});
    s.push_back({"head.W", h, kOutputs});
    s.push_back({"head.b", 1, kOutputs});
    return s;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

void CountryGraph::validate() const {
    const int nn = n();
    if (nn == 0) throw DomainError("country graph: no nodes");
    if (features.empty()) throw DomainError("country graph: no time steps");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.src < 0 || e.src >= nn || e.dst < 0 || e.dst >= nn)
            throw DomainError("country graph: edge index out of range");
        if (!std::isfinite(e.weight)) throw DomainError("country graph: non-finite edge weight");
        if (!seen.insert({e.src, e.dst}).second)
            throw DomainError("country graph: duplicate edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst));
    }
    for (const auto& f : features) {
        if (f.rows() != nn || f.cols() != width()) throw DomainError("country graph: ragged feature matrices");
        if (!f.allFinite()) throw DomainError("country graph: non-finite feature");
    }
}

std::vector<Edge> with_self_loops(const std::vector<Edge>& edges, int n) {
    std::vector<Edge> out = edges;
    std::vector<bool> has(static_cast<std::size_t>(n), false);
    for (const auto& e : edges)
        if (e.src == e.dst) has[static_cast<std::size_t>(e.src)] = true;
    for (int i = 0; i < n; ++i)
        if (!has[static_cast<std::size_t>(i)]) out.push_back({i, i, 1.0});
    return out;
}

ModelParams ModelParams::zeros(int features, int hidden) {
    if (features < 1 || hidden < 1) throw DomainError("model params: feature and hidden widths must be positive");
    ModelParams p;
    p.features = features;
    p.hidden = hidden;
    for (const auto& s : layout(features, hidden)) {
        p.names.push_back(s.name);
        p.tensors.push_back(MatrixXd::Zero(s.rows, s.cols));
    }
    return p;
}

ModelParams ModelParams::init(int features, int hidden, std::uint64_t seed) {
    ModelParams p = zeros(features, hidden);
    Rng rng = derived_rng(seed, 0);
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        auto& t = p.tensors[i];
        if (ends_with(p.names[i], "ln_gain")) {
            t.setOnes();
        } else if (p.penalized(i)) {
            const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
            for (Eigen::Index c = 0; c < t.cols(); ++c)
                for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = uniform(rng, -limit, limit);
        }
    }
    return p;
}

std::size_t ModelParams::index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw DomainError("model params: no tensor " + name);
}

MatrixXd& ModelParams::operator[](const std::string& name) { return tensors[index(name)]; }
const MatrixXd& ModelParams::operator[](const std::string& name) const { return tensors[index(name)]; }

bool ModelParams::penalized(std::size_t i) const {
    const auto& n = names[i];
    return !(ends_with(n, ".b") || ends_with(n, "ln_gain") || ends_with(n, "ln_bias"));
}

std::size_t ModelParams::size() const {
    std::size_t s = 0;
    for (const auto& t : tensors) s += static_cast<std::size_t>(t.size());
    return s;
}

void ModelParams::validate() const {
    const auto want = layout(features, hidden);
    if (want.size() != tensors.size() || names.size() != tensors.size())
        throw DomainError("model params: wrong tensor count");
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (names[i] != want[i].name) throw DomainError("model params: expected tensor " + want[i].name);
        if (tensors[i].rows() != want[i].rows || tensors[i].cols() != want[i].cols)
            throw DomainError("model params: bad shape for " + names[i]);
        if (!tensors[i].allFinite()) throw DomainError("model params: non-finite values in " + names[i]);
    }
}

// ---------------------------------------------------------------------------
// Forward pass with caches

namespace {

struct EdgeIndex {
    std::vector<Edge> edges;                  // with self loops
    std::vector<std::vector<std::size_t>> in; // edge ids per destination
};

EdgeIndex index_edges(const std::vector<Edge>& edges, int n) {
    EdgeIndex ix;
    ix.edges = with_self_loops(edges, n);
    ix.in.resize(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < ix.edges.size(); ++k) ix.in[static_cast<std::size_t>(ix.edges[k].dst)].push_back(k);
    return ix;
}

struct GatCache {
    MatrixXd hin, z, m, xhat, mask;
    VectorXd inv_std, s_src, s_dst;
    std::vector<double> raw, alpha;
};

struct Params {
    const MatrixXd *W, *a_src, *a_dst, *a_edge, *b, *gain, *bias;
};

Params gat_params(const ModelParams& p, int layer) {
    const std::string s = "gat" + std::to_string(layer) + ".";
    return {&p[s + "W"], &p[s + "a_src"], &p[s + "a_dst"], &p[s + "a_edge"], &p[s + "b"], &p[s + "ln_gain"],
            &p[s + "ln_bias"]};
}

MatrixXd gat_layer_cached(const MatrixXd& h, const EdgeIndex& ix, const ModelParams& p, int layer, GatCache& c,
                          double dropout, Rng* rng) {
    const Params q = gat_params(p, layer);
    const Eigen::Index n = h.rows(), hd = h.cols();
    c.hin = h;
    c.z = h * *q.W;
    c.s_src = c.z * *q.a_src;
    c.s_dst = c.z * *q.a_dst;
    const double ae = (*q.a_edge)(0, 0);
    const std::size_t ne = ix.edges.size();
    c.raw.assign(ne, 0.0);
    c.alpha.assign(ne, 0.0);
    for (std::size_t k = 0; k < ne; ++k) {
        const auto& e = ix.edges[k];
        c.raw[k] = c.s_src(e.src) + c.s_dst(e.dst) + ae * e.weight;
    }
    c.m = q.b->replicate(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& ids = ix.in[static_cast<std::size_t>(i)];
        double mx = -std::numeric_limits<double>::infinity();
        for (auto k : ids) {
            const double r = c.raw[k];
            mx = std::max(mx, r > 0 ? r : kLeakySlope * r);
        }
        double sum = 0.0;
        for (auto k : ids) {
            const double r = c.raw[k];
            c.alpha[k] = std::exp((r > 0 ? r : kLeakySlope * r) - mx);
            sum += c.alpha[k];
        }
        for (auto k : ids) {
            c.alpha[k] /= sum;
            c.m.row(i) += c.alpha[k] * c.z.row(ix.edges[k].src);
        }
    }
    const MatrixXd s = c.m.cwiseProduct(sigmoid(c.m));
    c.xhat.resize(n, hd);
    c.inv_std.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = s.row(i).mean();
        const double var = (s.row(i).array() - mu).square().mean();
        c.inv_std(i) = 1.0 / std::sqrt(var + kLayerNormEps);
        c.xhat.row(i) = (s.row(i).array() - mu) * c.inv_std(i);
    }
    MatrixXd out = c.xhat.array().rowwise() * q.gain->row(0).array();
    out.rowwise() += q.bias->row(0);
    c.mask = MatrixXd::Ones(n, hd);
    if (dropout > 0.0 && rng) {
        for (Eigen::Index j = 0; j < hd; ++j)
            for (Eigen::Index i = 0; i < n; ++i) c.mask(i, j) = bernoulli(*rng, 1.0 - dropout) ? 1.0 / (1.0 - dropout) : 0.0;
        out = out.cwiseProduct(c.mask);
    }
    return h + out;
}

struct StepCache {
    MatrixXd x;
    GatCache layer[2];
    MatrixXd out;
};

struct LstmCache {
    // per time step in processing order
    std::vector<MatrixXd> i, f, g, o, c, tanh_c, h_prev, c_prev, h;
};

void lstm_run(const std::vector<MatrixXd>& seq, const ModelParams& p, const std::string& dir, bool reverse,
              LstmCache& lc, std::vector<MatrixXd>& outputs, int column_offset) {
    const MatrixXd& Wx = p[dir + "Wx"];
    const MatrixXd& Wh = p[dir + "Wh"];
    const MatrixXd& b = p[dir + "b"];
    const int T = static_cast<int>(seq.size());
    const Eigen::Index n = seq.front().rows(), h = Wh.rows();
    MatrixXd hp = MatrixXd::Zero(n, h), cp = MatrixXd::Zero(n, h);
    for (int s = 0; s < T; ++s) {
        const int t = reverse ? T - 1 - s : s;
        MatrixXd pre = seq[static_cast<std::size_t>(t)] * Wx + hp * Wh;
        pre.rowwise() += b.row(0);
        MatrixXd I = sigmoid(pre.middleCols(0, h));
        MatrixXd F = sigmoid(pre.middleCols(h, h));
        MatrixXd G = pre.middleCols(2 * h, h).array().tanh().matrix();
        MatrixXd O = sigmoid(pre.middleCols(3 * h, h));
        MatrixXd C = F.cwiseProduct(cp) + I.cwiseProduct(G);
        MatrixXd tc = C.array().tanh().matrix();
        MatrixXd H = O.cwiseProduct(tc);
        lc.h_prev.push_back(hp);
        lc.c_prev.push_back(cp);
        lc.i.push_back(I);
        lc.f.push_back(F);
        lc.g.push_back(G);
        lc.o.push_back(O);
        lc.c.push_back(C);
        lc.tanh_c.push_back(tc);
        lc.h.push_back(H);
        outputs[static_cast<std::size_t>(t)].middleCols(column_offset, h) = H;
        hp = H;
        cp = C;
    }
}

struct FuseCache {
    std::vector<MatrixXd> o;  // N x 2H per step
    std::vector<MatrixXd> u;  // tanh(o W_a + b_a)
    MatrixXd beta;            // N x T
    MatrixXd ctx, r, gr, cat, gate, fused, yp, y;
};

MatrixXd fuse_cached(const MatrixXd& graph_last, const std::vector<MatrixXd>& temporal, const ModelParams& p,
                     FuseCache& fc) {
    const int T = static_cast<int>(temporal.size());
    const Eigen::Index n = graph_last.rows();
    fc.o = temporal;
    fc.u.clear();
    fc.beta.resize(n, T);
    for (int t = 0; t < T; ++t) {
        MatrixXd a = temporal[static_cast<std::size_t>(t)] * p["attn.W"];
        a.rowwise() += p["attn.b"].row(0);
        fc.u.push_back(a.array().tanh().matrix());
        fc.beta.col(t) = fc.u.back() * p["attn.v"];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = fc.beta.row(i).maxCoeff();
        fc.beta.row(i) = (fc.beta.row(i).array() - mx).exp();
        fc.beta.row(i) /= fc.beta.row(i).sum();
    }
    fc.ctx = MatrixXd::Zero(n, temporal.front().cols());
    for (int t = 0; t < T; ++t)
        fc.ctx += fc.beta.col(t).asDiagonal() * temporal[static_cast<std::size_t>(t)];
    fc.r = fc.ctx * p["temporal.W"];
    fc.r.rowwise() += p["temporal.b"].row(0);
    fc.gr = graph_last;
    fc.cat.resize(n, fc.r.cols() + fc.gr.cols());
    fc.cat << fc.r, fc.gr;
    MatrixXd q = fc.cat * p["gate.W"];
    q.rowwise() += p["gate.b"].row(0);
    fc.gate = sigmoid(q);
    fc.fused = fc.gate.cwiseProduct(fc.r) + (MatrixXd::Ones(n, fc.gate.cols()) - fc.gate).cwiseProduct(fc.gr);
    fc.yp = fc.fused * p["head.W"];
    fc.yp.rowwise() += p["head.b"].row(0);
    fc.y = fc.yp.unaryExpr([](double v) { return softplus(v); });
    return fc.y;
}

struct ForwardCache {
    EdgeIndex ix;
    std::vector<StepCache> steps;
    LstmCache fwd, bwd;
    std::vector<MatrixXd> temporal;
    FuseCache fuse;
};

MatrixXd forward(const CountryGraph& g, const ModelParams& p, ForwardCache& fc, double dropout, Rng* rng) {
    if (g.width() != p.features) throw DomainError("stgcn: feature width does not match the model");
    fc.ix = index_edges(g.edges, g.n());
    const int T = g.steps();
    fc.steps.assign(static_cast<std::size_t>(T), {});
    std::vector<MatrixXd> seq;
    for (int t = 0; t < T; ++t) {
        auto& sc = fc.steps[static_cast<std::size_t>(t)];
        sc.x = g.features[static_cast<std::size_t>(t)];
        MatrixXd h = sc.x * p["input.W"];
        h.rowwise() += p["input.b"].row(0);
        for (int l = 0; l < 2; ++l) h = gat_layer_cached(h, fc.ix, p, l, sc.layer[l], dropout, rng);
        sc.out = h;
        seq.push_back(h);
    }
    fc.temporal.assign(static_cast<std::size_t>(T), MatrixXd::Zero(g.n(), 2 * p.hidden));
    lstm_run(seq, p, "lstm_f.", false, fc.fwd, fc.temporal, 0);
    lstm_run(seq, p, "lstm_b.", true, fc.bwd, fc.temporal, p.hidden);
    return fuse_cached(seq.back(), fc.temporal, p, fc.fuse);
}

// ---------------------------------------------------------------------------
// Backward pass

struct Grads {
    const ModelParams& p;
    std::vector<MatrixXd>& g;
    MatrixXd& operator[](const std::string& name) { return g[p.index(name)]; }
};

MatrixXd gat_backward(const MatrixXd& dout, const EdgeIndex& ix, const ModelParams& p, int layer, const GatCache& c,
                      Grads& gr) {
    const Params q = gat_params(p, layer);
    const std::string s = "gat" + std::to_string(layer) + ".";
    const Eigen::Index n = dout.rows(), hd = dout.cols();
    MatrixXd dhin = dout;
    const MatrixXd dnorm = dout.cwiseProduct(c.mask);
    gr[s + "ln_gain"] += dnorm.cwiseProduct(c.xhat).colwise().sum();
    gr[s + "ln_bias"] += dnorm.colwise().sum();
    const MatrixXd dxhat = dnorm.array().rowwise() * q.gain->row(0).array();
    MatrixXd ds(n, hd);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m1 = dxhat.row(i).mean();
        const double m2 = dxhat.row(i).cwiseProduct(c.xhat.row(i)).mean();
        ds.row(i) = c.inv_std(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
    }
    const MatrixXd sg = sigmoid(c.m);
    const MatrixXd dm = ds.cwiseProduct(
        (sg.array() + c.m.array() * sg.array() * (1.0 - sg.array())).matrix());
    gr[s + "b"] += dm.colwise().sum();

    MatrixXd dz = MatrixXd::Zero(n, hd);
    VectorXd ds_src = VectorXd::Zero(n), ds_dst = VectorXd::Zero(n);
    double da_edge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& ids = ix.in[static_cast<std::size_t>(i)];
        double weighted = 0.0;
        std::vector<double> dalpha(ids.size());
        for (std::size_t a = 0; a < ids.size(); ++a) {
            const auto& e = ix.edges[ids[a]];
            dz.row(e.src) += c.alpha[ids[a]] * dm.row(i);
            dalpha[a] = dm.row(i).dot(c.z.row(e.src));
            weighted += c.alpha[ids[a]] * dalpha[a];
        }
        for (std::size_t a = 0; a < ids.size(); ++a) {
            const auto k = ids[a];
            const double de = c.alpha[k] * (dalpha[a] - weighted);
            const double draw = de * (c.raw[k] > 0 ? 1.0 : kLeakySlope);
            const auto& e = ix.edges[k];
            ds_src(e.src) += draw;
            ds_dst(e.dst) += draw;
            da_edge += draw * e.weight;
        }
    }
    gr[s + "a_edge"](0, 0) += da_edge;
    gr[s + "a_src"] += c.z.transpose() * ds_src;
    gr[s + "a_dst"] += c.z.transpose() * ds_dst;
    dz += ds_src * q.a_src->transpose() + ds_dst * q.a_dst->transpose();
    gr[s + "W"] += c.hin.transpose() * dz;
    dhin += dz * q.W->transpose();
    return dhin;
}

void lstm_backward(const LstmCache& lc, const std::vector<MatrixXd>& seq_in, const std::vector<MatrixXd>& dout,
                   const ModelParams& p, const std::string& dir, bool reverse, int column_offset, Grads& gr,
                   std::vector<MatrixXd>& dseq) {
    const MatrixXd& Wx = p[dir + "Wx"];
    const MatrixXd& Wh = p[dir + "Wh"];
    const int T = static_cast<int>(seq_in.size());
    const Eigen::Index h = Wh.rows(), n = seq_in.front().rows();
    MatrixXd dh_next = MatrixXd::Zero(n, h), dc_next = MatrixXd::Zero(n, h);
    MatrixXd& gWx = gr[dir + "Wx"];
    MatrixXd& gWh = gr[dir + "Wh"];
    MatrixXd& gb = gr[dir + "b"];
    for (int s = T - 1; s >= 0; --s) {
        const int t = reverse ? T - 1 - s : s;
        const auto k = static_cast<std::size_t>(s);
        const MatrixXd dh = dout[static_cast<std::size_t>(t)].middleCols(column_offset, h) + dh_next;
        const MatrixXd& O = lc.o[k];
        const MatrixXd& tc = lc.tanh_c[k];
        const MatrixXd dc = dc_next + dh.cwiseProduct(O).cwiseProduct((1.0 - tc.array().square()).matrix());
        MatrixXd dpre(n, 4 * h);
        dpre.middleCols(0, h) = dc.cwiseProduct(lc.g[k]).cwiseProduct((lc.i[k].array() * (1.0 - lc.i[k].array())).matrix());
        dpre.middleCols(h, h) =
            dc.cwiseProduct(lc.c_prev[k]).cwiseProduct((lc.f[k].array() * (1.0 - lc.f[k].array())).matrix());
        dpre.middleCols(2 * h, h) = dc.cwiseProduct(lc.i[k]).cwiseProduct((1.0 - lc.g[k].array().square()).matrix());
        dpre.middleCols(3 * h, h) = dh.cwiseProduct(tc).cwiseProduct((O.array() * (1.0 - O.array())).matrix());
        gWx += seq_in[static_cast<std::size_t>(t)].transpose() * dpre;
        gWh += lc.h_prev[k].transpose() * dpre;
        gb += dpre.colwise().sum();
        dseq[static_cast<std::size_t>(t)] += dpre * Wx.transpose();
        dh_next = dpre * Wh.transpose();
        dc_next = dc.cwiseProduct(lc.f[k]);
    }
}

} // namespace

MatrixXd gat_layer(const MatrixXd& h, const std::vector<Edge>& edges, const ModelParams& p, int layer,
                   std::vector<double>* attention) {
    if (layer < 0 || layer > 1) throw DomainError("gat_layer: layer must be 0 or 1");
    if (h.cols() != p.hidden) throw DomainError("gat_layer: state width does not match the model");
    const auto ix = index_edges(edges, static_cast<int>(h.rows()));
    GatCache c;
    MatrixXd out = gat_layer_cached(h, ix, p, layer, c, 0.0, nullptr);
    if (attention) *attention = c.alpha;
    return out;
}

MatrixXd gat_forward(const MatrixXd& x, const std::vector<Edge>& edges, const ModelParams& p) {
    if (x.cols() != p.features) throw DomainError("gat_forward: feature width does not match the model");
    MatrixXd h = x * p["input.W"];
    h.rowwise() += p["input.b"].row(0);
    for (int l = 0; l < 2; ++l) h = gat_layer(h, edges, p, l);
    return h;
}

std::vector<MatrixXd> bilstm_forward(const std::vector<MatrixXd>& seq, const ModelParams& p) {
    if (seq.empty()) throw DomainError("bilstm_forward: empty sequence");
    std::vector<MatrixXd> out(seq.size(), MatrixXd::Zero(seq.front().rows(), 2 * p.hidden));
    LstmCache f, b;
    lstm_run(seq, p, "lstm_f.", false, f, out, 0);
    lstm_run(seq, p, "lstm_b.", true, b, out, p.hidden);
    return out;
}

MatrixXd fuse_and_predict(const MatrixXd& graph_last, const std::vector<MatrixXd>& temporal, const ModelParams& p,
                          MatrixXd* gate) {
    if (temporal.empty()) throw DomainError("fuse_and_predict: empty temporal sequence");
    FuseCache fc;
    MatrixXd y = fuse_cached(graph_last, temporal, p, fc);
    if (gate) *gate = fc.gate;
    return y;
}

MatrixXd predict(const CountryGraph& g, const ModelParams& p) {
    g.validate();
    ForwardCache fc;
    return forward(g, p, fc, 0.0, nullptr);
}

namespace {

double penalty(const ModelParams& p, const LossConfig& cfg) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        if (!p.penalized(i)) continue;
        s += cfg.l1 * p.tensors[i].cwiseAbs().sum() + cfg.l2 * p.tensors[i].squaredNorm();
    }
    return s;
}

void check_targets(const CountryGraph& g, const MatrixXd& targets) {
    if (targets.rows() != g.n() || targets.cols() != kOutputs)
        throw DomainError("stgcn: targets must be N x 3 in node order");
    if (!targets.allFinite()) throw DomainError("stgcn: non-finite targets");
}

} // namespace

double loss_value(const CountryGraph& g, const MatrixXd& targets, const ModelParams& p, const LossConfig& cfg) {
    check_targets(g, targets);
    ForwardCache fc;
    const MatrixXd y = forward(g, p, fc, 0.0, nullptr);
    return (y - targets).squaredNorm() / static_cast<double>(y.size()) + penalty(p, cfg);
}

LossAndGrad loss_and_gradient(const CountryGraph& g, const MatrixXd& targets, const ModelParams& p,
                              const LossConfig& cfg, std::uint64_t dropout_seed) {
    check_targets(g, targets);
    if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw DomainError("stgcn: dropout must lie in [0, 1)");
    Rng rng = derived_rng(dropout_seed, 1);
    ForwardCache fc;
    const MatrixXd y = forward(g, p, fc, cfg.dropout, cfg.dropout > 0.0 ? &rng : nullptr);

    LossAndGrad out;
    out.mse = (y - targets).squaredNorm() / static_cast<double>(y.size());
    out.loss = out.mse + penalty(p, cfg);
    for (const auto& t : p.tensors) out.grad.push_back(MatrixXd::Zero(t.rows(), t.cols()));
    Grads gr{p, out.grad};
    const auto& f = fc.fuse;
    const Eigen::Index n = y.rows();
    const int T = g.steps();

    const MatrixXd dy = 2.0 * (y - targets) / static_cast<double>(y.size());
    const MatrixXd dyp = dy.cwiseProduct(sigmoid(f.yp));
    gr["head.W"] += f.fused.transpose() * dyp;
    gr["head.b"] += dyp.colwise().sum();
    const MatrixXd dfused = dyp * p["head.W"].transpose();
    const MatrixXd dgate = dfused.cwiseProduct(f.r - f.gr);
    MatrixXd dr = dfused.cwiseProduct(f.gate);
    MatrixXd dgr = dfused - dfused.cwiseProduct(f.gate);
    const MatrixXd dq = dgate.cwiseProduct((f.gate.array() * (1.0 - f.gate.array())).matrix());
    gr["gate.W"] += f.cat.transpose() * dq;
    gr["gate.b"] += dq.colwise().sum();
    const MatrixXd dcat = dq * p["gate.W"].transpose();
    dr += dcat.leftCols(p.hidden);
    dgr += dcat.rightCols(p.hidden);
    gr["temporal.W"] += f.ctx.transpose() * dr;
    gr["temporal.b"] += dr.colwise().sum();
    const MatrixXd dctx = dr * p["temporal.W"].transpose();

    std::vector<MatrixXd> dtemporal(static_cast<std::size_t>(T));
    MatrixXd dbeta(n, T);
    for (int t = 0; t < T; ++t) {
        const auto& o = f.o[static_cast<std::size_t>(t)];
        dbeta.col(t) = dctx.cwiseProduct(o).rowwise().sum();
        dtemporal[static_cast<std::size_t>(t)] = f.beta.col(t).asDiagonal() * dctx;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = f.beta.row(i).dot(dbeta.row(i));
        dbeta.row(i) = f.beta.row(i).array() * (dbeta.row(i).array() - w);
    }
    for (int t = 0; t < T; ++t) {
        const auto& u = f.u[static_cast<std::size_t>(t)];
        const MatrixXd du = dbeta.col(t) * p["attn.v"].transpose();
        gr["attn.v"] += u.transpose() * dbeta.col(t);
        const MatrixXd da = du.cwiseProduct((1.0 - u.array().square()).matrix());
        gr["attn.W"] += f.o[static_cast<std::size_t>(t)].transpose() * da;
        gr["attn.b"] += da.colwise().sum();
        dtemporal[static_cast<std::size_t>(t)] += da * p["attn.W"].transpose();
    }

    std::vector<MatrixXd> seq, dseq;
    for (const auto& sc : fc.steps) {
        seq.push_back(sc.out);
        dseq.push_back(MatrixXd::Zero(sc.out.rows(), sc.out.cols()));
    }
    dseq.back() += dgr;
    lstm_backward(fc.fwd, seq, dtemporal, p, "lstm_f.", false, 0, gr, dseq);
    lstm_backward(fc.bwd, seq, dtemporal, p, "lstm_b.", true, p.hidden, gr, dseq);

    for (int t = 0; t < T; ++t) {
        const auto& sc = fc.steps[static_cast<std::size_t>(t)];
        MatrixXd dh = dseq[static_cast<std::size_t>(t)];
        for (int l = 1; l >= 0; --l) dh = gat_backward(dh, fc.ix, p, l, sc.layer[l], gr);
        gr["input.W"] += sc.x.transpose() * dh;
        gr["input.b"] += dh.colwise().sum();
    }

    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        if (!p.penalized(i)) continue;
        const auto& w = p.tensors[i];
        out.grad[i] += cfg.l1 * w.unaryExpr([](double v) { return double((v > 0) - (v < 0)); }) + 2.0 * cfg.l2 * w;
    }
    return out;
}

void save_checkpoint(const ModelParams& p, std::ostream& out) {
    p.validate();
    out << "olymp-stgcn 1\n";
    out << "features " << p.features << " hidden " << p.hidden << " tensors " << p.tensors.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        const auto& t = p.tensors[i];
        out << p.names[i] << ' ' << t.rows() << ' ' << t.cols() << '\n';
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            for (Eigen::Index c = 0; c < t.cols(); ++c) out << (c ? " " : "") << t(r, c);
            out << '\n';
        }
    }
}

ModelParams load_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "olymp-stgcn") throw DomainError("checkpoint: not an olymp-stgcn file");
    if (version != 1) throw DomainError("checkpoint: unsupported version " + std::to_string(version));
    std::string k1, k2, k3;
    int f = 0, h = 0;
    std::size_t count = 0;
    if (!(in >> k1 >> f >> k2 >> h >> k3 >> count) || k1 != "features" || k2 != "hidden" || k3 != "tensors")
        throw DomainError("checkpoint: malformed shape header");
    ModelParams p = ModelParams::zeros(f, h);
    if (count != p.tensors.size()) throw DomainError("checkpoint: wrong tensor count");
    for (std::size_t i = 0; i < count; ++i) {
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols)) throw DomainError("checkpoint: truncated tensor header");
        if (name != p.names[i] || rows != p.tensors[i].rows() || cols != p.tensors[i].cols())
            throw DomainError("checkpoint: unexpected tensor " + name);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                std::string tok;
                if (!(in >> tok)) throw DomainError("checkpoint: truncated values in " + name);
                p.tensors[i](r, c) = std::stod(tok);
            }
    }
    p.validate();
    return p;
}

} // namespace olymp::stgcn
