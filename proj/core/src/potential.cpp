#include "exitlab/potential.hpp"

#include "exitlab/error.hpp"

#include <cmath>
#include <utility>

namespace exitlab {

PotentialField::PotentialField(std::shared_ptr<const PotentialModel> model, std::optional<std::string> catalog_id)
    : model_(std::move(model)), id_(std::move(catalog_id)), dim_(model_ ? model_->dimension() : 0) {
    if (!model_) throw Error(ErrorCode::InvalidArgument, "null potential model");
    if (dim_ != 1 && dim_ != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
}

Evaluation PotentialField::eval_all(const Vec& x) const {
    return {model_->value(x), model_->grad(x), model_->hess(x)};
}

namespace {

class Shifted final : public PotentialModel {
public:
    Shifted(std::shared_ptr<const PotentialModel> base, double c) : base_(std::move(base)), c_(c) {}
    int dimension() const override { return base_->dimension(); }
    double value(const Vec& x) const override { return base_->value(x) + c_; }
    Vec grad(const Vec& x) const override { return base_->grad(x); }
    Mat hess(const Vec& x) const override { return base_->hess(x); }

private:
    std::shared_ptr<const PotentialModel> base_;
    double c_;
};

class DoubleWell final : public PotentialModel {
public:
    int dimension() const override { return 1; }
    double value(const Vec& x) const override {
        const double s = x(0) * x(0) - 1.0;
        return s * s;
    }
    Vec grad(const Vec& x) const override { return {4.0 * x(0) * (x(0) * x(0) - 1.0), 0.0}; }
    Mat hess(const Vec& x) const override {
        Mat m = Mat::Zero();
        m(0, 0) = 12.0 * x(0) * x(0) - 4.0;
        return m;
    }
};

class DampedSine final : public PotentialModel {
public:
    int dimension() const override { return 1; }
    double value(const Vec& x) const override { return 6.0 * std::sin(x(0)) * std::exp(-x(0) / 5.0); }
    Vec grad(const Vec& x) const override {
        const double e = std::exp(-x(0) / 5.0);
        return {6.0 * e * (std::cos(x(0)) - std::sin(x(0)) / 5.0), 0.0};
    }
    Mat hess(const Vec& x) const override {
        const double e = std::exp(-x(0) / 5.0);
        const double s = std::sin(x(0));
        const double c = std::cos(x(0));
        Mat m = Mat::Zero();
        m(0, 0) = 6.0 * e * (-s - 0.4 * c + s / 25.0);
        return m;
    }
};

class Polynomial final : public PotentialModel {
public:
    Polynomial(int dim, std::vector<Monomial> terms) : dim_(dim), terms_(std::move(terms)) {
        for (const auto& t : terms_) {
            if (t.px < 0 || t.py < 0) throw Error(ErrorCode::InvalidArgument, "negative monomial power");
            if (dim_ == 1 && t.py != 0) throw Error(ErrorCode::InvalidArgument, "y power in a 1D polynomial");
        }
    }
    int dimension() const override { return dim_; }
    double value(const Vec& x) const override {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coeff * pw(x(0), t.px) * pw(x(1), t.py);
        return s;
    }
    Vec grad(const Vec& x) const override {
        Vec g = Vec::Zero();
        for (const auto& t : terms_) {
            if (t.px > 0) g(0) += t.coeff * t.px * pw(x(0), t.px - 1) * pw(x(1), t.py);
            if (t.py > 0) g(1) += t.coeff * t.py * pw(x(0), t.px) * pw(x(1), t.py - 1);
        }
        return g;
    }
    Mat hess(const Vec& x) const override {
        Mat m = Mat::Zero();
        for (const auto& t : terms_) {
            if (t.px > 1) m(0, 0) += t.coeff * t.px * (t.px - 1) * pw(x(0), t.px - 2) * pw(x(1), t.py);
            if (t.py > 1) m(1, 1) += t.coeff * t.py * (t.py - 1) * pw(x(0), t.px) * pw(x(1), t.py - 2);
            if (t.px > 0 && t.py > 0) {
                const double v = t.coeff * t.px * t.py * pw(x(0), t.px - 1) * pw(x(1), t.py - 1);
                m(0, 1) += v;
                m(1, 0) += v;
            }
        }
        return m;
    }

private:
    static double pw(double b, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= b;
        return r;
    }
    int dim_;
    std::vector<Monomial> terms_;
};

class GaussianSum final : public PotentialModel {
public:
    GaussianSum(int dim, std::vector<Monomial> base, std::vector<GaussianBump> bumps)
        : base_(dim, std::move(base)), dim_(dim), bumps_(std::move(bumps)) {
        for (const auto& b : bumps_) {
            if (!(b.width(0) > 0.0) || (dim_ == 2 && !(b.width(1) > 0.0)))
                throw Error(ErrorCode::InvalidArgument, "gaussian width must be positive");
        }
    }
    int dimension() const override { return dim_; }
    double value(const Vec& x) const override {
        double s = base_.value(x);
        for (const auto& b : bumps_) s += b.amplitude * std::exp(-quad(b, x));
        return s;
    }
    Vec grad(const Vec& x) const override {
        Vec g = base_.grad(x);
        for (const auto& b : bumps_) {
            const double e = b.amplitude * std::exp(-quad(b, x));
            for (int k = 0; k < dim_; ++k) g(k) -= e * (x(k) - b.center(k)) / (b.width(k) * b.width(k));
        }
        return g;
    }
    Mat hess(const Vec& x) const override {
        Mat m = base_.hess(x);
        for (const auto& b : bumps_) {
            const double e = b.amplitude * std::exp(-quad(b, x));
            Vec r = Vec::Zero();
            for (int k = 0; k < dim_; ++k) r(k) = (x(k) - b.center(k)) / (b.width(k) * b.width(k));
            for (int i = 0; i < dim_; ++i) {
                for (int j = 0; j < dim_; ++j) {
                    const double diag = (i == j) ? 1.0 / (b.width(i) * b.width(i)) : 0.0;
                    m(i, j) += e * (r(i) * r(j) - diag);
                }
            }
        }
        return m;
    }

private:
    double quad(const GaussianBump& b, const Vec& x) const {
        double q = 0.0;
        for (int k = 0; k < dim_; ++k) {
            const double d = (x(k) - b.center(k)) / b.width(k);
            q += 0.5 * d * d;
        }
        return q;
    }
    Polynomial base_;
    int dim_;
    std::vector<GaussianBump> bumps_;
};

}  // namespace

PotentialField PotentialField::shifted(double c) const {
    return PotentialField(std::make_shared<Shifted>(model_, c), id_);
}

PotentialField make_polynomial(int dim, std::vector<Monomial> terms) {
    if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
    return PotentialField(std::make_shared<Polynomial>(dim, std::move(terms)));
}

PotentialField make_gaussian_sum(int dim, std::vector<Monomial> base, std::vector<GaussianBump> bumps) {
    if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
    return PotentialField(std::make_shared<GaussianSum>(dim, std::move(base), std::move(bumps)));
}

namespace catalog {

PotentialField p1() { return PotentialField(std::make_shared<DoubleWell>(), "P1"); }
PotentialField p2() { return PotentialField(std::make_shared<DampedSine>(), "P2"); }
PotentialField p3() {
    return PotentialField(std::make_shared<Polynomial>(2, std::vector<Monomial>{{1.0, 2, 0}, {2.0, 0, 2}}), "P3");
}
PotentialField flat(int dim) {
    return PotentialField(std::make_shared<Polynomial>(dim, std::vector<Monomial>{}), dim == 1 ? "flat1d" : "flat2d");
}
PotentialField quadratic_bowl(int dim) {
    std::vector<Monomial> t{{0.5, 2, 0}};
    if (dim == 2) t.push_back({0.5, 0, 2});
    return PotentialField(std::make_shared<Polynomial>(dim, std::move(t)), dim == 1 ? "bowl1d" : "bowl2d");
}
PotentialField linear(double slope) {
    return PotentialField(std::make_shared<Polynomial>(1, std::vector<Monomial>{{slope, 1, 0}}), "linear");
}
PotentialField asymmetric_well() {
    return PotentialField(std::make_shared<Polynomial>(1, std::vector<Monomial>{{1.0, 2, 0}}), "asym-well");
}

PotentialField by_id(const std::string& id) {
    if (id == "P1" || id == "double-well-wide") {
        return PotentialField(std::make_shared<DoubleWell>(), id);
    }
    if (id == "P2") return p2();
    if (id == "P3") return p3();
    if (id == "flat1d") return flat(1);
    if (id == "flat2d") return flat(2);
    if (id == "bowl1d") return quadratic_bowl(1);
    if (id == "bowl2d") return quadratic_bowl(2);
    if (id == "linear") return linear(1.0);
    if (id == "asym-well") return asymmetric_well();
    throw Error(ErrorCode::InvalidArgument, "unknown catalog potential '" + id + "'");
}

std::vector<std::string> ids() {
    return {"P1", "P2", "P3", "flat1d", "flat2d", "bowl1d", "bowl2d", "linear", "asym-well", "double-well-wide"};
}

}  // namespace catalog

}  // namespace exitlab
