#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "rlcnet/error.hpp"
#include "rlcnet/loss.hpp"
#include "support.hpp"

using namespace rlcnet;
using doctest::Approx;

namespace {

std::vector<double> grid(int m, double t0 = 0.0, double t1 = 1.0)
{
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) out[i] = t0 + (t1 - t0) * i / (m - 1);
    return out;
}

// Steady-state current of the class-1 circuit written as one cosine neuron.
FourierNet phasor_net(const CircuitParams& phi)
{
    using namespace std::complex_literals;
    const double w = 2 * std::numbers::pi * phi.f;
    const std::complex<double> s = 1i * w;
    const std::complex<double> h = s / (1.0 / phi.C + phi.R * s + phi.L * s * s);
    return FourierNet({w}, {std::arg(h) - std::numbers::pi / 2}, {std::abs(h) * phi.Vmax}, 0.0);
}

LossConfig config_with_data(const FourierNet& truth, std::vector<double> coll, int order)
{
    LossConfig cfg;
    cfg.collocation = std::move(coll);
    DataBlock data;
    data.times = grid(9, 0.05, 0.45);
    for (double t : data.times) data.targets.push_back(truth.eval(t) + 0.01);
    cfg.data = data;
    cfg.ic.t0 = 0.0;
    for (int k = 0; k < order; ++k) cfg.ic.values.push_back(0.1 * (k + 1));
    return cfg;
}

}  // namespace

TEST_SUITE("loss")
{
TEST_CASE("residual of the zero current under a zero source vanishes")
{
    const auto phi = preset(CircuitClass::Class2, PresetKind::Initial);
    const SourceWaveform silent{0.0, 2 * std::numbers::pi * phi.f};
    const FourierNet zero({1.0}, {0.0}, {0.0}, 0.0);
    for (double t : {0.0, 0.3, 0.77}) CHECK(residual(zero, ode_for_class(CircuitClass::Class2, phi), silent, t) == 0.0);
}

TEST_CASE("phasor steady state satisfies the class-1 equation")
{
    for (auto kind : {PresetKind::Initial, PresetKind::Analysis}) {
        const auto phi = preset(CircuitClass::Class1, kind);
        const auto net = phasor_net(phi);
        const auto ode = ode_for_class(CircuitClass::Class1, phi);
        const auto src = SourceWaveform::from(phi);
        const double bound = 1e-8 * phi.Vmax * src.omega;
        for (double t : grid(50)) CHECK(std::abs(residual(net, ode, src, t)) < bound);
    }
}

TEST_CASE("residual is the weighted derivative sum")
{
    Rng rng(31);
    const auto net = testing::random_net(rng, 5);
    const LinearOde ode{{1.5, -2.0, 0.25}, {0.3, 1.0}};
    const SourceWaveform src{4.0, 7.0};
    for (double t : {0.0, 0.4}) {
        const double want = 1.5 * net.eval(t) - 2.0 * net.derivative(1, t) + 0.25 * net.derivative(2, t) -
                            0.3 * 4.0 * std::sin(7.0 * t) - 1.0 * 28.0 * std::cos(7.0 * t);
        CHECK(residual(net, ode, src, t) == Approx(want).epsilon(1e-12));
    }
    const std::vector<double> short_stack{1.0, 2.0};
    CHECK_THROWS_AS(residual(short_stack, ode, src, 0.0), InvalidArgument);
}

TEST_CASE("loss terms by hand")
{
    const auto phi = preset(CircuitClass::Class1, PresetKind::Initial);
    const auto ode = ode_for_class(CircuitClass::Class1, phi);
    const auto src = SourceWaveform::from(phi);
    Rng rng(32);
    const auto net = testing::random_net(rng, 4);
    auto cfg = config_with_data(phasor_net(phi), grid(13), 2);
    cfg.weights = {0.5, 2.0, 3.0};
    const LossProblem problem(cfg, ode, src);
    const auto got = total_loss(net, problem);

    double data = 0.0;
    for (std::size_t i = 0; i < cfg.data->times.size(); ++i) data += std::pow(net.eval(cfg.data->times[i]) - cfg.data->targets[i], 2);
    data /= cfg.data->times.size();
    double pde = 0.0;
    for (double t : cfg.collocation) pde += std::pow(residual(net, ode, src, t), 2);
    pde /= cfg.collocation.size();
    const double ic = (std::pow(net.eval(0.0) - 0.1, 2) + std::pow(net.derivative(1, 0.0) - 0.2, 2)) / 2;

    CHECK(got.data == Approx(data).epsilon(1e-12));
    CHECK(got.pde == Approx(pde).epsilon(1e-12));
    CHECK(got.ic == Approx(ic).epsilon(1e-12));
    CHECK(got.total == Approx(0.5 * data + 2.0 * pde + 3.0 * ic).epsilon(1e-12));

    const auto res = problem.residuals(derivative_table(net, problem));
    REQUIRE(res.size() == cfg.collocation.size());
    for (std::size_t i = 0; i < res.size(); ++i) CHECK(res[i] == Approx(residual(net, ode, src, cfg.collocation[i])));
}

TEST_CASE("without data the total is the physics part")
{
    const auto phi = preset(CircuitClass::Class2, PresetKind::Analysis);
    Rng rng(33);
    const auto net = testing::random_net(rng, 6);
    LossConfig cfg;
    cfg.collocation = grid(21);
    cfg.ic.values = {0.0, 0.0, 0.0};
    const LossProblem problem(cfg, ode_for_class(CircuitClass::Class2, phi), SourceWaveform::from(phi));
    const auto l = total_loss(net, problem);
    CHECK(l.data == 0.0);
    CHECK(l.total == Approx(l.pde + l.ic).epsilon(1e-14));
}

TEST_CASE("total is linear in the weights")
{
    const auto phi = preset(CircuitClass::Class1, PresetKind::Analysis);
    Rng rng(34);
    const auto net = testing::random_net(rng, 3);
    auto cfg = config_with_data(net, grid(11), 2);
    const auto ode = ode_for_class(CircuitClass::Class1, phi);
    const auto src = SourceWaveform::from(phi);
    const auto base = total_loss(net, LossProblem(cfg, ode, src));
    for (int trial = 0; trial < 5; ++trial) {
        cfg.weights = {rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)};
        const auto l = total_loss(net, LossProblem(cfg, ode, src));
        CHECK(l.total == Approx(cfg.weights.data * base.data + cfg.weights.pde * base.pde + cfg.weights.ic * base.ic)
                             .epsilon(1e-12));
    }
}

TEST_CASE("invalid configurations")
{
    const auto phi = preset(CircuitClass::Class1, PresetKind::Initial);
    const auto ode = ode_for_class(CircuitClass::Class1, phi);
    const auto src = SourceWaveform::from(phi);
    LossConfig cfg;
    cfg.collocation = grid(5);
    cfg.ic.values = {0.0};
    CHECK_THROWS_AS(LossProblem(cfg, ode, src), InvalidArgument);  // IC order too low
    cfg.ic.values = {0.0, 0.0};
    cfg.weights.pde = -1.0;
    CHECK_THROWS_AS(LossProblem(cfg, ode, src), InvalidArgument);
    cfg.weights.pde = 1.0;
    cfg.collocation.clear();
    CHECK_THROWS_AS(LossProblem(cfg, ode, src), InvalidArgument);
    cfg.collocation = grid(5);
    cfg.data = DataBlock{{0.1, 0.2}, {1.0}};
    CHECK_THROWS_AS(LossProblem(cfg, ode, src), InvalidArgument);
}

TEST_CASE("fourier loss gradient matches finite differences")
{
    Rng rng(35);
    for (auto c : kAllClasses) {
        const auto phi = preset(c, PresetKind::Initial);
        const auto ode = ode_for_class(c, phi);
        for (int trial = 0; trial < 4; ++trial) {
            const auto net = testing::random_net(rng, 1 + rng.below(10));
            auto cfg = config_with_data(net, grid(17), ode.order());
            cfg.weights = {1.0, 1e-6, 0.5};
            const LossProblem problem(cfg, ode, SourceWaveform::from(phi));
            std::vector<double> grad;
            const auto l = loss_gradient(net, problem, grad);
            CHECK(l.total == Approx(total_loss(net, problem).total).epsilon(1e-14));
            auto f = [&](std::span<const double> p) {
                FourierNet m = net;
                m.set_params(p);
                return total_loss(m, problem).total;
            };
            const auto fd = testing::fd_gradient(f, net.params(), 1e-7);
            CHECK(testing::normwise_error(grad, fd) < 1e-5);
        }
    }
}

TEST_CASE("offset gradient comes from data and the zeroth initial condition only")
{
    const FourierNet net({3.0}, {0.2}, {0.0}, 0.7);
    LossConfig cfg;
    cfg.collocation = grid(7);
    cfg.data = DataBlock{{0.1, 0.2}, {0.5, 0.3}};
    cfg.ic.values = {0.2, 0.0};
    const LossProblem problem(cfg, LinearOde{{1.0, 0.0, 1.0}, {0.0}}, SourceWaveform{0.0, 1.0});
    std::vector<double> grad;
    loss_gradient(net, problem, grad);
    // data: mean of 2*(0.7 - y); ic: 2*(0.7 - 0.2)/2; pde: 2*mean(0.7)
    const double expected = ((0.4 + 0.8) / 2) + 0.5 + 1.4;
    CHECK(grad.back() == Approx(expected).epsilon(1e-12));
}

TEST_CASE("mlp loss gradient matches finite differences")
{
    Rng rng(36);
    const auto phi = preset(CircuitClass::Class2, PresetKind::Initial);
    const auto ode = ode_for_class(CircuitClass::Class2, phi);
    auto mlp = Mlp::init(1, 5, 4);
    auto p = mlp.params();
    for (auto& x : p) x += 0.2 * rng.normal();
    mlp.set_params(p);
    const auto truth = testing::random_net(rng, 2);
    auto cfg = config_with_data(truth, grid(9), ode.order());
    cfg.weights = {1.0, 1e-7, 1.0};
    const LossProblem problem(cfg, ode, SourceWaveform::from(phi));
    std::vector<double> grad;
    loss_gradient(mlp, problem, grad);
    auto f = [&](std::span<const double> q) {
        Mlp m = mlp;
        m.set_params(q);
        return total_loss(m, problem).total;
    };
    CHECK(testing::normwise_error(grad, testing::fd_gradient(f, mlp.params(), 1e-6)) < 1e-4);
}

TEST_CASE("gradient over R for class 1")
{
    const auto phi = preset(CircuitClass::Class1, PresetKind::Initial);
    Rng rng(37);
    const auto net = testing::random_net(rng, 4);
    auto cfg = config_with_data(net, grid(15), 2);
    cfg.weights = {1.0, 0.25, 1.0};
    const LossProblem problem(cfg, ode_for_class(CircuitClass::Class1, phi), SourceWaveform::from(phi));
    const std::vector<PhysicalParam> free{PhysicalParam::R};
    const auto g = phi_gradient(net, problem, CircuitClass::Class1, phi, free);
    REQUIRE(g.size() == 1);
    double expected = 0.0;
    for (double t : cfg.collocation) expected += residual(net, problem.ode(), problem.source(), t) * net.derivative(1, t);
    expected *= 0.25 * 2.0 / cfg.collocation.size();
    CHECK(g[0] == Approx(expected).epsilon(1e-12));
}

TEST_CASE("physical gradient vanishes at an exact solution")
{
    const auto phi = preset(CircuitClass::Class1, PresetKind::Analysis);
    const auto net = phasor_net(phi);
    LossConfig cfg;
    cfg.collocation = grid(31);
    cfg.ic.values = {net.eval(0.0), net.derivative(1, 0.0)};
    const LossProblem problem(cfg, ode_for_class(CircuitClass::Class1, phi), SourceWaveform::from(phi));
    const std::vector<PhysicalParam> free{PhysicalParam::R, PhysicalParam::L, PhysicalParam::C};
    const auto g = phi_gradient(net, problem, CircuitClass::Class1, phi, free);
    const double scale = phi.Vmax * SourceWaveform::from(phi).omega;
    CHECK(std::abs(g[0]) < 1e-6 * scale);
    CHECK(std::abs(g[1]) < 1e-6 * scale);
}

TEST_CASE("physical gradient matches finite differences")
{
    Rng rng(38);
    for (auto c : kAllClasses) {
        const auto phi = preset(c, PresetKind::Initial);
        const auto net = testing::random_net(rng, 3);
        LossConfig cfg;
        cfg.collocation = grid(11);
        cfg.ic.values.assign(ode_for_class(c, phi).order(), 0.0);
        const std::vector<PhysicalParam> free{PhysicalParam::R, PhysicalParam::L, PhysicalParam::C};
        LossProblem problem(cfg, ode_for_class(c, phi), SourceWaveform::from(phi));
        const auto g = phi_gradient(net, problem, c, phi, free);
        for (std::size_t i = 0; i < free.size(); ++i) {
            const double x = get(phi, free[i]);
            const double h = 1e-3 * x;  // the loss is large, so a small step drowns in round-off
            auto at = [&](double v) {
                CircuitParams q = phi;
                set(q, free[i], v);
                problem.set_ode(ode_for_class(c, q));
                return total_loss(net, problem).total;
            };
            const double fd = (8 * (at(x + h) - at(x - h)) - (at(x + 2 * h) - at(x - 2 * h))) / (12 * h);
            INFO("class " << class_index(c) << " param " << i << " loss " << total_loss(net, problem).total);
            CHECK(g[i] == Approx(fd).epsilon(1e-5));
        }
        CircuitParams bad = phi;
        bad.R = 0.0;
        CHECK_THROWS_AS(phi_gradient(net, problem, c, bad, free), DomainError);
    }
}

TEST_CASE("epoch log format")
{
    const std::vector<EpochRecord> rec{{0, 10.0, {3.0, 1.0, 1.5, 0.5}}, {1, 0.001, {2.0, 0.5, 1.0, 0.5}}};
    const auto text = format_epoch_log(rec);
    CHECK(text.rfind("epoch,lr,total,l_data,l_pde,l_ic\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("\n1,0.001,2,0.5,1,0.5\n") != std::string::npos);
}
}
