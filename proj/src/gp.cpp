#include "safegrid/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "safegrid/errors.hpp"

namespace safegrid {

namespace {
constexpr double kZeroNoiseJitter = 1e-10;
}

GpModel::GpModel(GridWorld world, Kernel kernel, double noise_variance)
    : world_(world), kernel_(kernel), noise_variance_(noise_variance) {
    kernel_.validate();
    if (noise_variance < 0.0) {
        throw std::invalid_argument("noise_variance must be nonnegative");
    }
    kcols_.resize(world_.size(), 0);
}

void GpModel::add_observation(State s, double y) {
    if (!world_.contains(s)) {
        throw std::invalid_argument("add_observation: state outside the grid");
    }
    add_observation(world_.index(s), y);
}

void GpModel::add_observation(int state_index, double y) {
    if (state_index < 0 || state_index >= world_.size()) {
        throw std::invalid_argument("add_observation: state index out of range");
    }
    if (!std::isfinite(y)) {
        throw std::invalid_argument("add_observation: value must be finite");
    }
    archive_.push_back({state_index, y});

    auto it = site_of_state_.find(state_index);
    if (it == site_of_state_.end()) {
        const int j = static_cast<int>(sites_.size());
        sites_.push_back({state_index, y, 1});
        site_of_state_.emplace(state_index, j);
        kcols_.conservativeResize(Eigen::NoChange, j + 1);
        const State site = world_.state(state_index);
        for (int i = 0; i < world_.size(); ++i) {
            kcols_(i, j) = kernel_eval(kernel_, world_, world_.state(i), site);
        }
        dirty_ = true;
        ++revision_;
        return;
    }

    Site& site = sites_[it->second];
    if (noise_variance_ == 0.0 && y == site.mean) {
        // Exact repeat of a noiseless reading: the posterior is unchanged.
        site.count += 1;
        return;
    }
    site.mean += (y - site.mean) / (site.count + 1);
    site.count += 1;
    dirty_ = true;
    ++revision_;
}

double GpModel::site_noise(const Site& site) const {
    if (noise_variance_ > 0.0) return noise_variance_ / site.count;
    return kZeroNoiseJitter;
}

void GpModel::refresh() {
    if (!dirty_) return;
    const int m = static_cast<int>(sites_.size());
    Eigen::MatrixXd K(m, m);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        y(i) = sites_[i].mean;
        for (int j = 0; j < m; ++j) K(i, j) = kcols_(sites_[i].state, j);
        K(i, i) += site_noise(sites_[i]);
    }

    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
        double jitter = kZeroNoiseJitter;
        for (; jitter <= 1.0000001e-6; jitter *= 10.0) {
            Eigen::MatrixXd Kj = K;
            Kj.diagonal().array() += jitter;
            llt.compute(Kj);
            if (llt.info() == Eigen::Success) break;
        }
        if (llt.info() != Eigen::Success) {
            throw IllConditionedError(
                "GpModel: kernel system not positive definite after jitter "
                "retries up to 1e-6");
        }
    }
    chol_lower_ = llt.matrixL();
    alpha_ = llt.solve(y);
    dirty_ = false;
}

std::vector<Belief> GpModel::posterior(std::span<const int> states) {
    const double prior_std = std::sqrt(kernel_.variance);
    std::vector<Belief> out(states.size());
    if (sites_.empty()) {
        for (auto& b : out) b = {0.0, prior_std};
        return out;
    }
    refresh();

    const int m = static_cast<int>(sites_.size());
    const int q = static_cast<int>(states.size());
    Eigen::MatrixXd Kq(m, q);
    for (int j = 0; j < q; ++j) {
        const int s = states[j];
        if (s < 0 || s >= world_.size()) {
            throw std::invalid_argument("posterior: state index out of range");
        }
        Kq.col(j) = kcols_.row(s).transpose();
    }

    const Eigen::VectorXd means = Kq.transpose() * alpha_;
    const Eigen::MatrixXd W =
        chol_lower_.triangularView<Eigen::Lower>().solve(Kq);
    for (int j = 0; j < q; ++j) {
        const double var =
            std::max(0.0, kernel_.variance - W.col(j).squaredNorm());
        out[j] = {means(j), std::sqrt(var)};
    }
    return out;
}

const std::vector<Belief>& GpModel::posterior_all() {
    if (cached_all_revision_ == revision_ && !dirty_ && !cached_all_.empty()) {
        return cached_all_;
    }
    std::vector<int> all(world_.size());
    for (int i = 0; i < world_.size(); ++i) all[i] = i;
    cached_all_ = posterior(all);
    cached_all_revision_ = revision_;
    return cached_all_;
}

}  // namespace safegrid
