#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "emgrt/error.hpp"
#include "emgrt/oracle.hpp"
#include "emgrt/projection.hpp"
#include "datasets.hpp"
#include "helpers.hpp"

using namespace emgrt;
using emgrt::test::circles;
using emgrt::test::gaussian_classes;
using emgrt::test::midpoint_accuracy;
using emgrt::test::scatters;

namespace {

std::vector<double> ranks(const Eigen::VectorXd& v)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        r[static_cast<std::size_t>(idx[k])] = static_cast<double>(k);
    }
    return r;
}

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(ra.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    }
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("linear fisher matches the closed-form two-class direction")
{
    Rng rng(21);
    const auto t = gaussian_classes(rng, {Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 0)}, 500);
    const auto model = train_linear_fisher(t, 1);
    const auto w = oracle::fisher_direction(oracle::to_rows(t.features), t.labels);
    const Eigen::Vector2d want(w[0], w[1]);
    const Eigen::VectorXd got = model.basis.row(0).transpose();
    CHECK(std::abs(got.dot(want)) / (got.norm() * want.norm()) > 0.999);
    CHECK(got.norm() == doctest::Approx(1.0).epsilon(1e-12));

    const auto s = scatters(t);
    Eigen::MatrixXd sw = s.within;
    sw.diagonal().array() += kDefaultFisherRidge * s.within.trace() / 2.0;
    const double residual = (s.between * got - model.eigenvalues[0] * sw * got).norm() / got.norm();
    CHECK(residual < 1e-8);
}

TEST_CASE("linear fisher with no between-class signal")
{
    Rng rng(22);
    auto t = gaussian_classes(rng, {Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)}, 500);
    // shuffle labels
    for (std::size_t i = t.labels.size() - 1; i > 0; --i) {
        std::swap(t.labels[i], t.labels[test::uniform_int(rng, 0, i)]);
    }
    const auto model = train_linear_fisher(t, 1);
    CHECK(model.eigenvalues[0] < 5e-2);
    CHECK(model.basis.allFinite());
    CHECK(trace_ratio(make_scatter(model, t).projected, t.labels, 2) < 5e-2);
}

TEST_CASE("projection dimension bounds")
{
    Rng rng(23);
    std::vector<Eigen::VectorXd> means;
    for (int c = 0; c < 9; ++c) {
        means.push_back(test::random_vector(rng, 24, 5.0));
    }
    const auto t = gaussian_classes(rng, means, 30);
    CHECK(train_linear_fisher(t, 8).basis.rows() == 8);
    CHECK_THROWS_AS(train_linear_fisher(t, 9), Error);
    CHECK_THROWS_AS(train_linear_fisher(t, 0), Error);
    KernelFisherOptions o;
    o.dims = 9;
    CHECK_THROWS_AS(train_kernel_fisher(t, o), Error);
}

TEST_CASE("training matrix validation")
{
    TrainingMatrix t;
    t.classes = 2;
    t.features = Eigen::MatrixXd::Zero(3, 2);
    t.labels = {0, 0, 1};
    CHECK_THROWS_AS(t.check(), Error);  // class 1 has a single row
    t.labels = {0, 1, 2};
    CHECK_THROWS_AS(t.check(), Error);  // label out of range
    t.labels = {0, 1};
    CHECK_THROWS_AS(t.check(), Error);  // count mismatch
}

TEST_CASE("singular within-class scatter is a numeric error")
{
    TrainingMatrix t;
    t.classes = 2;
    t.features.resize(4, 2);
    t.features << 0, 0, 0, 0, 1, 1, 1, 1;
    t.labels = {0, 0, 1, 1};
    try {
        train_linear_fisher(t, 1);
        FAIL("expected numeric error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numeric);
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
}

TEST_CASE("linear project")
{
    Rng rng(24);
    LinearProjectionModel m;
    m.mean = test::random_vector(rng, 24);
    m.basis = test::random_matrix(rng, 8, 24);
    m.eigenvalues = Eigen::VectorXd::Ones(8);

    CHECK(m.project(m.mean).isZero(0.0));

    LinearProjectionModel id;
    id.mean = Eigen::VectorXd::Zero(24);
    id.basis = Eigen::MatrixXd::Identity(24, 24).topRows(8);
    id.eigenvalues = Eigen::VectorXd::Ones(8);
    const Eigen::VectorXd f = test::random_vector(rng, 24);
    CHECK(id.project(f) == f.head(8));

    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd g = test::random_vector(rng, 24, 10.0);
        const auto got = m.project(g);
        const auto want = oracle::project(oracle::to_vec(m.mean), oracle::to_rows(m.basis), oracle::to_vec(g));
        for (Eigen::Index k = 0; k < 8; ++k) {
            REQUIRE(std::abs(got[k] - want[static_cast<std::size_t>(k)]) <= 1e-12 * (1.0 + std::abs(want[static_cast<std::size_t>(k)])));
        }
    }
    CHECK_THROWS_AS(m.project(Eigen::VectorXd::Zero(23)), Error);
}

TEST_CASE("property: linear projection is affine")
{
    Rng rng(25);
    std::vector<Eigen::VectorXd> means;
    for (int c = 0; c < 5; ++c) {
        means.push_back(test::random_vector(rng, 12, 3.0));
    }
    const auto model = train_linear_fisher(gaussian_classes(rng, means, 40), 4);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd a = test::random_vector(rng, 12, 5.0);
        const Eigen::VectorXd b = test::random_vector(rng, 12, 5.0);
        const Eigen::VectorXd lhs = model.project(a) - model.project(b);
        const Eigen::VectorXd rhs = model.basis * (a - b);
        REQUIRE((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("property: fisher trace ratio beats random orthogonal projections")
{
    Rng rng(26);
    std::vector<Eigen::VectorXd> means;
    for (int c = 0; c < 4; ++c) {
        means.push_back(test::random_vector(rng, 10, 2.0));
    }
    const auto t = gaussian_classes(rng, means, 60);
    const auto model = train_linear_fisher(t, 3);
    const double fisher = trace_ratio(make_scatter(model, t).projected, t.labels, t.classes);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(test::random_matrix(rng, 10, 3));
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(10, 3);
        LinearProjectionModel random;
        random.mean = model.mean;
        random.basis = q.transpose();
        random.eigenvalues = Eigen::VectorXd::Zero(3);
        REQUIRE(fisher >= trace_ratio(make_scatter(random, t).projected, t.labels, t.classes));
    }
}

TEST_CASE("property: generalized eigen residual of every retained pair")
{
    Rng rng(27);
    for (int trial = 0; trial < 100; ++trial) {
        const int classes = static_cast<int>(test::uniform_int(rng, 2, 6));
        const auto dim = static_cast<Eigen::Index>(test::uniform_int(rng, 3, 12));
        std::vector<Eigen::VectorXd> means;
        for (int c = 0; c < classes; ++c) {
            means.push_back(test::random_vector(rng, dim, 2.0));
        }
        const auto t = gaussian_classes(rng, means, 25);
        const int dims = std::min<int>(classes - 1, static_cast<int>(dim));
        const auto model = train_linear_fisher(t, dims);
        const auto s = scatters(t);
        Eigen::MatrixXd sw = s.within;
        sw.diagonal().array() += kDefaultFisherRidge * s.within.trace() / static_cast<double>(dim);
        for (int k = 0; k < dims; ++k) {
            const Eigen::VectorXd e = model.basis.row(k).transpose();
            REQUIRE((s.between * e - model.eigenvalues[k] * sw * e).norm() / e.norm() < 1e-8);
            if (k > 0) {
                REQUIRE(model.eigenvalues[k] <= model.eigenvalues[k - 1]);
            }
            Eigen::Index arg = 0;
            e.cwiseAbs().maxCoeff(&arg);
            REQUIRE(e[arg] > 0.0);
        }
    }
}

TEST_CASE("kernel fisher separates concentric circles where linear fisher cannot")
{
    Rng rng(28);
    const auto t = circles(rng, 300);
    KernelFisherOptions o;
    o.dims = 1;
    const auto kernel = train_kernel_fisher(t, o);
    const auto linear = train_linear_fisher(t, 1);
    CHECK(midpoint_accuracy(make_scatter(kernel, t)) >= 0.98);
    CHECK(midpoint_accuracy(make_scatter(linear, t)) <= 0.60);
}

TEST_CASE("kernel fisher approaches linear ordering for a very wide kernel")
{
    Rng rng(29);
    const auto t = gaussian_classes(rng, {Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 1)}, 150, 0.8);
    const auto linear = train_linear_fisher(t, 1);
    KernelFisherOptions o;
    o.dims = 1;
    o.bandwidth = 100.0 * median_pairwise_distance(t.features);
    const auto kernel = train_kernel_fisher(t, o);
    const Eigen::VectorXd a = make_scatter(linear, t).projected.col(0);
    const Eigen::VectorXd b = make_scatter(kernel, t).projected.col(0);
    CHECK(std::abs(spearman(a, b)) > 0.95);
}

TEST_CASE("kernel projection")
{
    Rng rng(30);
    std::vector<Eigen::VectorXd> means;
    for (int c = 0; c < 4; ++c) {
        means.push_back(test::random_vector(rng, 6, 2.0));
    }
    const auto t = gaussian_classes(rng, means, 20);
    KernelFisherOptions o;
    o.dims = 3;
    const auto model = train_kernel_fisher(t, o);
    const auto d = make_scatter(model, t);

    SUBCASE("training points reproduce their scatter rows")
    {
        for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
            const Eigen::VectorXd p = model.project(t.features.row(i).transpose());
            REQUIRE((p - d.projected.row(i).transpose()).norm() < 1e-9);
        }
    }
    SUBCASE("far points collapse to the kernel-mean correction")
    {
        const Eigen::VectorXd far = Eigen::VectorXd::Constant(6, 1e6);
        const Eigen::VectorXd p = model.project(far);
        CHECK(p.allFinite());
        const Eigen::VectorXd want = -(model.coefficients() * model.kernel_mean());
        CHECK((p - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }
    SUBCASE("matches the naive dual expansion")
    {
        const auto support = oracle::to_rows(model.support());
        const auto coeffs = oracle::to_rows(model.coefficients());
        const auto kmean = oracle::to_vec(model.kernel_mean());
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd f = test::random_vector(rng, 6, 2.0);
            const auto got = model.project(f);
            const auto want = oracle::kernel_project(support, model.bandwidth(), coeffs, kmean, oracle::to_vec(f));
            for (Eigen::Index k = 0; k < 3; ++k) {
                REQUIRE(std::abs(got[k] - want[static_cast<std::size_t>(k)]) <=
                        1e-12 * (1.0 + model.coefficients().row(k).cwiseAbs().sum()));
            }
        }
    }
    SUBCASE("dimension mismatch")
    {
        CHECK_THROWS_AS(model.project(Eigen::VectorXd::Zero(5)), Error);
    }
}

TEST_CASE("kernel fisher parameter errors")
{
    Rng rng(31);
    const auto t = gaussian_classes(rng, {Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0)}, 10);
    KernelFisherOptions o;
    o.dims = 1;
    o.bandwidth = 0.0;
    CHECK_THROWS_AS(train_kernel_fisher(t, o), Error);
    o.bandwidth = 1.0;
    o.reg = -1.0;
    CHECK_THROWS_AS(train_kernel_fisher(t, o), Error);
    o.reg = 0.0;
    CHECK_THROWS_AS(train_kernel_fisher(t, o), Error);
}

TEST_CASE("training is deterministic")
{
    Rng rng(32);
    const auto t = circles(rng, 60);
    KernelFisherOptions o;
    o.dims = 1;
    const auto a = train_kernel_fisher(t, o);
    const auto b = train_kernel_fisher(t, o);
    CHECK(a.coefficients() == b.coefficients());
    const Eigen::VectorXd x = t.features.row(3).transpose();
    CHECK(a.project(x) == b.project(x));
    CHECK(a.project(x).allFinite());
    CHECK(train_linear_fisher(t, 1).basis == train_linear_fisher(t, 1).basis);
}

TEST_CASE("make_scatter shapes")
{
    SUBCASE("10 rows into 8 dims")
    {
        TrainingMatrix t;
        t.classes = 9;
        t.features = Eigen::MatrixXd::Random(10, 24);
        t.labels.assign(10, 0);
        LinearProjectionModel id;
        id.mean = Eigen::VectorXd::Zero(24);
        id.basis = Eigen::MatrixXd::Identity(24, 24).topRows(8);
        id.eigenvalues = Eigen::VectorXd::Ones(8);
        const auto d = make_scatter(id, t);
        CHECK(d.projected.rows() == 10);
        CHECK(d.projected.cols() == 8);
        CHECK(d.labels == t.labels);
        CHECK(make_scatter(id, t).projected == d.projected);
    }
    SUBCASE("7200 rows, nine classes")
    {
        Rng rng(33);
        std::vector<Eigen::VectorXd> means;
        for (int c = 0; c < 9; ++c) {
            means.push_back(test::random_vector(rng, 24, 4.0));
        }
        const auto t = gaussian_classes(rng, means, 800);
        const auto model = train_linear_fisher(t, 8);
        const auto d = make_scatter(model, t);
        CHECK(d.projected.rows() == 7200);
        CHECK(d.projected.cols() == 8);
    }
}
