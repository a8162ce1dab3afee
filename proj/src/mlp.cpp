#include "rlcnet/mlp.hpp"

#include <cmath>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"
#include "rlcnet/random.hpp"

namespace rlcnet {

namespace {

using Eigen::MatrixXd;

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

void check_degree(int d)
{
    if (d < 0 || d > Mlp::kMaxJetDegree) {
        throw InvalidArgument("jet degree must be in [0, 4], got " + std::to_string(d));
    }
}

auto block(MatrixXd& m, int k, Eigen::Index points) { return m.middleCols(k * points, points); }
auto block(const MatrixXd& m, int k, Eigen::Index points) { return m.middleCols(k * points, points); }

// Jet of tanh: y0 = tanh(z0), u = 1 - y^2, y_k = (1/k) sum_{j=1..k} j z_j u_{k-j}.
MatrixXd tanh_jet(const MatrixXd& z, int degree, Eigen::Index points)
{
    MatrixXd y(z.rows(), z.cols());
    MatrixXd u(z.rows(), z.cols());
    block(y, 0, points) = block(z, 0, points).array().tanh().matrix();
    for (int k = 0; k <= degree; ++k) {
        if (k > 0) {
            auto yk = block(y, k, points);
            yk.setZero();
            for (int j = 1; j <= k; ++j) {
                yk.array() += (static_cast<double>(j) / k) * block(z, j, points).array() *
                              block(u, k - j, points).array();
            }
        }
        auto uk = block(u, k, points);
        uk.setZero();
        if (k == 0) uk.setOnes();
        for (int i = 0; i <= k; ++i) {
            uk.array() -= block(y, i, points).array() * block(y, k - i, points).array();
        }
    }
    return y;
}

// Reverse sweep through tanh_jet given the recomputed forward jets.
MatrixXd tanh_jet_backward(const MatrixXd& z, const MatrixXd& y, MatrixXd ybar, int degree, Eigen::Index points)
{
    MatrixXd u(z.rows(), z.cols());
    for (int k = 0; k <= degree; ++k) {
        auto uk = block(u, k, points);
        uk.setZero();
        if (k == 0) uk.setOnes();
        for (int i = 0; i <= k; ++i) uk.array() -= block(y, i, points).array() * block(y, k - i, points).array();
    }
    MatrixXd zbar = MatrixXd::Zero(z.rows(), z.cols());
    MatrixXd ubar = MatrixXd::Zero(z.rows(), z.cols());
    for (int k = degree; k >= 0; --k) {
        // u_k is consumed only by y_{k+1..degree}, all processed already.
        const auto uk_bar = block(ubar, k, points).array().eval();
        for (int p = 0; p <= k; ++p) {
            block(ybar, p, points).array() -= 2.0 * block(y, k - p, points).array() * uk_bar;
        }
        if (k == 0) break;
        const auto yk_bar = block(ybar, k, points).array();
        for (int j = 1; j <= k; ++j) {
            const double c = static_cast<double>(j) / k;
            block(zbar, j, points).array() += c * yk_bar * block(u, k - j, points).array();
            block(ubar, k - j, points).array() += c * yk_bar * block(z, j, points).array();
        }
    }
    block(zbar, 0, points).array() +=
        (1.0 - block(y, 0, points).array().square()) * block(ybar, 0, points).array();
    return zbar;
}

}  // namespace

double TaylorJet::derivative(int n) const
{
    if (n < 0 || n > degree() || n > Mlp::kMaxJetDegree) {
        throw InvalidArgument("jet has no coefficient of order " + std::to_string(n));
    }
    return kFactorial[n] * coeffs[n];
}

Mlp::Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
    : weights_(std::move(weights)), biases_(std::move(biases))
{
    if (weights_.empty() || weights_.size() != biases_.size()) {
        throw InvalidArgument("Mlp needs one bias vector per weight matrix");
    }
    if (weights_.front().cols() != 1 || weights_.back().rows() != 1) {
        throw InvalidArgument("Mlp maps a scalar time to a scalar current");
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (biases_[l].size() != weights_[l].rows() ||
            (l > 0 && weights_[l].cols() != weights_[l - 1].rows())) {
            throw InvalidArgument("Mlp layer " + std::to_string(l) + " has inconsistent shapes");
        }
    }
}

Mlp Mlp::init(int hidden_layers, std::uint64_t seed, int width)
{
    if (hidden_layers < 1 || hidden_layers > kMaxHiddenLayers) {
        throw InvalidArgument("hidden layer count must be in [1, 5], got " + std::to_string(hidden_layers));
    }
    if (width < 1) {
        throw InvalidArgument("hidden width must be positive");
    }
    std::vector<int> sizes{1};
    for (int h = 0; h < hidden_layers; ++h) sizes.push_back(width);
    sizes.push_back(1);

    Rng rng(seed);
    std::vector<MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l], fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        MatrixXd W(fan_out, fan_in);
        for (int c = 0; c < fan_in; ++c) {
            for (int r = 0; r < fan_out; ++r) W(r, c) = rng.uniform(-limit, limit);
        }
        weights.push_back(std::move(W));
        biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return Mlp(std::move(weights), std::move(biases));
}

std::vector<int> Mlp::layer_sizes() const
{
    std::vector<int> sizes;
    if (weights_.empty()) return sizes;
    sizes.push_back(static_cast<int>(weights_.front().cols()));
    for (const auto& W : weights_) sizes.push_back(static_cast<int>(W.rows()));
    return sizes;
}

std::size_t Mlp::param_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    }
    return n;
}

std::vector<double> Mlp::params() const
{
    std::vector<double> flat;
    flat.reserve(param_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return flat;
}

void Mlp::set_params(std::span<const double> flat)
{
    if (flat.size() != param_count()) {
        throw InvalidArgument("parameter vector has " + std::to_string(flat.size()) + " entries, Mlp expects " +
                              std::to_string(param_count()));
    }
    const double* p = flat.data();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        std::copy_n(p, weights_[l].size(), weights_[l].data());
        p += weights_[l].size();
        std::copy_n(p, biases_[l].size(), biases_[l].data());
        p += biases_[l].size();
    }
}

double Mlp::eval(double t) const
{
    Eigen::VectorXd a = Eigen::VectorXd::Constant(1, t);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        a = weights_[l] * a + biases_[l];
        if (l + 1 < weights_.size()) a = a.array().tanh().matrix();
    }
    return a(0);
}

TaylorJet Mlp::jet_eval(double t, int degree) const
{
    const double times[] = {t};
    const MatrixXd d = derivatives(times, degree);
    TaylorJet jet;
    for (int k = 0; k <= degree; ++k) jet.coeffs.push_back(d(k, 0) / kFactorial[k]);
    return jet;
}

Eigen::MatrixXd Mlp::derivatives(std::span<const double> times, int degree, MlpTape* tape) const
{
    check_degree(degree);
    if (weights_.empty()) {
        throw InvalidArgument("Mlp has no layers");
    }
    const auto M = static_cast<Eigen::Index>(times.size());
    const int blocks = degree + 1;

    MatrixXd a = MatrixXd::Zero(1, blocks * M);
    for (Eigen::Index i = 0; i < M; ++i) a(0, i) = times[i];
    if (degree >= 1) block(a, 1, M).setOnes();

    if (tape) {
        tape->degree = degree;
        tape->points = M;
        tape->inputs.clear();
        tape->pre.clear();
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        MatrixXd z = weights_[l] * a;
        block(z, 0, M).colwise() += biases_[l];
        if (tape) tape->inputs.push_back(a);
        if (l + 1 < weights_.size()) {
            a = tanh_jet(z, degree, M);
        } else {
            a = z;
        }
        if (tape) tape->pre.push_back(std::move(z));
    }
    if (!a.allFinite()) {
        throw DivergenceError("non-finite network output");
    }

    MatrixXd out(blocks, M);
    for (int k = 0; k < blocks; ++k) out.row(k) = kFactorial[k] * block(a, k, M);
    return out;
}

std::vector<double> Mlp::backward(const MlpTape& tape, const Eigen::MatrixXd& adjoint) const
{
    const auto M = tape.points;
    const int degree = tape.degree;
    if (adjoint.rows() != degree + 1 || adjoint.cols() != M || tape.pre.size() != weights_.size()) {
        throw InvalidArgument("adjoint does not match the recorded tape");
    }
    if (!adjoint.allFinite()) {
        throw DivergenceError("non-finite loss adjoint");
    }

    MatrixXd zbar(1, (degree + 1) * M);
    for (int k = 0; k <= degree; ++k) block(zbar, k, M) = kFactorial[k] * adjoint.row(k);

    std::vector<MatrixXd> wgrad(weights_.size());
    std::vector<Eigen::VectorXd> bgrad(weights_.size());
    for (std::size_t l = weights_.size(); l-- > 0;) {
        wgrad[l].noalias() = zbar * tape.inputs[l].transpose();
        bgrad[l] = block(zbar, 0, M).rowwise().sum();
        if (l == 0) break;
        MatrixXd abar = weights_[l].transpose() * zbar;
        zbar = tanh_jet_backward(tape.pre[l - 1], tape.inputs[l], std::move(abar), degree, M);
    }

    std::vector<double> flat;
    flat.reserve(param_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), wgrad[l].data(), wgrad[l].data() + wgrad[l].size());
        flat.insert(flat.end(), bgrad[l].data(), bgrad[l].data() + bgrad[l].size());
    }
    return flat;
}

bool Mlp::operator==(const Mlp& other) const
{
    if (weights_.size() != other.weights_.size()) return false;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (weights_[l].rows() != other.weights_[l].rows() || weights_[l].cols() != other.weights_[l].cols() ||
            weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) {
            return false;
        }
    }
    return true;
}

nlohmann::json checkpoint_json(const Mlp& mlp, const ModelMeta& meta)
{
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (std::size_t l = 0; l < mlp.weights().size(); ++l) {
        const auto& W = mlp.weights()[l];
        std::vector<double> row_major;
        row_major.reserve(static_cast<std::size_t>(W.size()));
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) row_major.push_back(W(r, c));
        }
        weights.push_back(row_major);
        const auto& b = mlp.biases()[l];
        biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    return nlohmann::json{{"version", kMlpCheckpointVersion},
                          {"family", "mlp"},
                          {"layer_sizes", mlp.layer_sizes()},
                          {"weights", weights},
                          {"biases", biases},
                          {"meta", meta}};
}

MlpCheckpoint mlp_checkpoint_from_json(const nlohmann::json& j)
{
    try {
        const int version = j.at("version").get<int>();
        if (version != kMlpCheckpointVersion) {
            throw ParseError("unsupported MLP checkpoint version " + std::to_string(version));
        }
        const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
        const auto& wj = j.at("weights");
        const auto& bj = j.at("biases");
        if (sizes.size() < 2 || wj.size() + 1 != sizes.size() || bj.size() + 1 != sizes.size()) {
            throw ParseError("checkpoint layer_sizes do not match the stored layers");
        }
        std::vector<MatrixXd> weights;
        std::vector<Eigen::VectorXd> biases;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto w = wj[l].get<std::vector<double>>();
            const auto b = bj[l].get<std::vector<double>>();
            const int fan_in = sizes[l], fan_out = sizes[l + 1];
            if (fan_in < 1 || fan_out < 1 || w.size() != static_cast<std::size_t>(fan_in) * fan_out ||
                b.size() != static_cast<std::size_t>(fan_out)) {
                throw ParseError("checkpoint layer " + std::to_string(l) + " has the wrong number of entries");
            }
            MatrixXd W(fan_out, fan_in);
            for (int r = 0; r < fan_out; ++r) {
                for (int c = 0; c < fan_in; ++c) W(r, c) = w[static_cast<std::size_t>(r) * fan_in + c];
            }
            weights.push_back(std::move(W));
            biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), fan_out));
        }
        ModelMeta meta = j.contains("meta") ? j.at("meta").get<ModelMeta>() : ModelMeta{};
        return {Mlp(std::move(weights), std::move(biases)), std::move(meta)};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("corrupt MLP checkpoint: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("corrupt MLP checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Mlp& mlp, const ModelMeta& meta, const std::filesystem::path& path)
{
    write_json_file(path, checkpoint_json(mlp, meta));
}

MlpCheckpoint load_mlp_checkpoint(const std::filesystem::path& path)
{
    return mlp_checkpoint_from_json(read_json_file(path));
}

}  // namespace rlcnet
