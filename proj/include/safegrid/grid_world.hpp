#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace safegrid {

/// The five grid actions. Declaration order doubles as the deterministic
/// tie-break order everywhere a maximizer over actions is extracted.
enum class Action : int { stay = 0, up = 1, right = 2, down = 3, left = 4 };

constexpr std::array<Action, 5> kAllActions = {
    Action::stay, Action::up, Action::right, Action::down, Action::left};

std::string action_name(Action a);
Action action_from_name(const std::string& name);

struct State {
    int x = 0;
    int y = 0;
    friend bool operator==(const State&, const State&) = default;
};

/// Finite rectangular state space with the deterministic transition
/// function. Actions that would leave the grid map back to the current
/// state, so the transition is total.
class GridWorld {
public:
    GridWorld(int width, int height, double cell_size = 1.0);

    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return cell_size_; }
    int size() const { return width_ * height_; }

    bool contains(State s) const {
        return s.x >= 0 && s.x < width_ && s.y >= 0 && s.y < height_;
    }

    /// Row-major index; (row, column) = (y, x), so ascending index order
    /// is the lexicographic (row, column) order used for tie-breaks.
    int index(State s) const { return s.y * width_ + s.x; }
    State state(int index) const { return {index % width_, index / width_}; }

    State transition(State s, Action a) const;

    /// Euclidean distance in physical units (cells scaled by cell_size).
    double distance(State a, State b) const {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return cell_size_ * std::sqrt(dx * dx + dy * dy);
    }

private:
    int width_;
    int height_;
    double cell_size_;
};

/// Subset of grid states, stored as a membership mask over a fixed
/// universe of n states.
class StateSet {
public:
    StateSet() = default;
    explicit StateSet(int universe) : mask_(universe, 0) {}

    int universe() const { return static_cast<int>(mask_.size()); }
    int count() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(int i) const { return mask_[i] != 0; }

    void insert(int i) {
        if (!mask_[i]) {
            mask_[i] = 1;
            ++count_;
        }
    }

    void erase(int i) {
        if (mask_[i]) {
            mask_[i] = 0;
            --count_;
        }
    }

    std::vector<int> to_vector() const;

    friend bool operator==(const StateSet&, const StateSet&) = default;

private:
    std::vector<char> mask_;
    int count_ = 0;
};

/// a ⊆ b over the same universe.
bool is_subset(const StateSet& a, const StateSet& b);

StateSet set_union(const StateSet& a, const StateSet& b);
StateSet set_intersection(const StateSet& a, const StateSet& b);

}  // namespace safegrid
