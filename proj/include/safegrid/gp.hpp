#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "safegrid/grid_world.hpp"
#include "safegrid/kernel.hpp"

namespace safegrid {

/// Marginal posterior at one state.
struct Belief {
    double mean = 0.0;
    double std = 0.0;
};

struct RawObservation {
    int state = 0;  // grid state index
    double value = 0.0;
};

/// Exact GP regression over grid states.
///
/// The full observation archive is kept, but the factorization works on
/// per-site sufficient statistics: n observations y_1..y_n at one state
/// are equivalent to a single observation mean(y) with noise sigma^2/n,
/// so the kernel system never grows beyond the number of distinct
/// observed states. With sigma^2 = 0 a diagonal jitter of 1e-10 stands
/// in for the noise and repeated identical readings carry no new
/// information.
///
/// Queries refresh the cached Cholesky factor lazily; `revision()`
/// changes only when an added observation actually alters the posterior,
/// which lets callers skip recomputing downstream state.
class GpModel {
public:
    GpModel(GridWorld world, Kernel kernel, double noise_variance);

    void add_observation(State s, double y);
    void add_observation(int state_index, double y);

    int observation_count() const { return static_cast<int>(archive_.size()); }
    const std::vector<RawObservation>& observations() const { return archive_; }
    std::uint64_t revision() const { return revision_; }

    const GridWorld& world() const { return world_; }
    const Kernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }

    /// Posterior mean/std at the given state indices. With no
    /// observations this is the prior (0, sqrt(prior variance)).
    std::vector<Belief> posterior(std::span<const int> states);

    /// Posterior over every grid state, cached per revision.
    const std::vector<Belief>& posterior_all();

private:
    struct Site {
        int state = 0;
        double mean = 0.0;
        int count = 0;
    };

    void refresh();
    double site_noise(const Site& site) const;

    GridWorld world_;
    Kernel kernel_;
    double noise_variance_;

    std::vector<RawObservation> archive_;
    std::vector<Site> sites_;
    std::unordered_map<int, int> site_of_state_;
    Eigen::MatrixXd kcols_;  // |S| x m, column j = k(. , site j)

    bool dirty_ = false;
    std::uint64_t revision_ = 0;
    Eigen::MatrixXd chol_lower_;
    Eigen::VectorXd alpha_;

    std::uint64_t cached_all_revision_ = ~std::uint64_t{0};
    std::vector<Belief> cached_all_;
};

}  // namespace safegrid
