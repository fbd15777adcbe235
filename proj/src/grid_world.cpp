#include "safegrid/grid_world.hpp"

#include <stdexcept>

namespace safegrid {

std::string action_name(Action a) {
    switch (a) {
        case Action::stay: return "stay";
        case Action::up: return "up";
        case Action::right: return "right";
        case Action::down: return "down";
        case Action::left: return "left";
    }
    throw std::invalid_argument("unknown action");
}

Action action_from_name(const std::string& name) {
    for (Action a : kAllActions) {
        if (action_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown action name: " + name);
}

GridWorld::GridWorld(int width, int height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    if (!(cell_size > 0.0)) {
        throw std::invalid_argument("cell_size must be positive");
    }
}

State GridWorld::transition(State s, Action a) const {
    State next = s;
    switch (a) {
        case Action::stay: break;
        case Action::up: next.y += 1; break;
        case Action::right: next.x += 1; break;
        case Action::down: next.y -= 1; break;
        case Action::left: next.x -= 1; break;
    }
    return contains(next) ? next : s;
}

std::vector<int> StateSet::to_vector() const {
    std::vector<int> out;
    out.reserve(count_);
    for (int i = 0; i < universe(); ++i) {
        if (mask_[i]) out.push_back(i);
    }
    return out;
}

bool is_subset(const StateSet& a, const StateSet& b) {
    for (int i = 0; i < a.universe(); ++i) {
        if (a.contains(i) && !b.contains(i)) return false;
    }
    return true;
}

StateSet set_union(const StateSet& a, const StateSet& b) {
    StateSet out(a.universe());
    for (int i = 0; i < a.universe(); ++i) {
        if (a.contains(i) || b.contains(i)) out.insert(i);
    }
    return out;
}

StateSet set_intersection(const StateSet& a, const StateSet& b) {
    StateSet out(a.universe());
    for (int i = 0; i < a.universe(); ++i) {
        if (a.contains(i) && b.contains(i)) out.insert(i);
    }
    return out;
}

}  // namespace safegrid
