#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "format.hpp"

// Weighted atomic measures on the real line: the carrier for rescaled
// magnetization laws (atoms at (k - N m)/sqrt(N)) and for empirical sample
// clouds. Atoms are kept sorted with strictly increasing positions.

namespace dising {

struct Atom {
    double position = 0.0;
    double weight = 0.0;
    std::int64_t k = 0;  // originating spin total, when there is one
};

class WeightedMeasure {
public:
    WeightedMeasure() = default;

    // Sorts, merges equal positions, and validates weights.
    static WeightedMeasure make(std::vector<Atom> atoms) {
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.position < b.position; });
        WeightedMeasure mu;
        for (const Atom& a : atoms) {
            if (!(a.weight >= 0.0) || !std::isfinite(a.weight) || !std::isfinite(a.position))
                throw std::invalid_argument("WeightedMeasure: non-finite atom");
            if (a.weight == 0.0) continue;
            if (!mu.atoms_.empty() && mu.atoms_.back().position == a.position)
                mu.atoms_.back().weight += a.weight;
            else
                mu.atoms_.push_back(a);
        }
        double mass = 0.0;
        for (const Atom& a : mu.atoms_) mass += a.weight;
        mu.total_mass_ = mass;
        return mu;
    }

    static WeightedMeasure from_samples(const std::vector<double>& xs) {
        if (xs.empty()) throw std::invalid_argument("WeightedMeasure: empty sample set");
        std::vector<Atom> atoms;
        atoms.reserve(xs.size());
        const double w = 1.0 / static_cast<double>(xs.size());
        for (double x : xs) atoms.push_back({x, w, 0});
        return make(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const { return total_mass_; }
    bool empty() const { return atoms_.empty(); }

    WeightedMeasure normalized() const {
        if (!(total_mass_ > 0.0))
            throw std::domain_error("WeightedMeasure: cannot normalize zero mass");
        WeightedMeasure mu(*this);
        for (Atom& a : mu.atoms_) a.weight /= total_mass_;
        mu.total_mass_ = 1.0;
        return mu;
    }

    template <class Fn>
    double integrate(Fn&& g) const {
        double acc = 0.0;
        for (const Atom& a : atoms_) acc += a.weight * g(a.position);
        return acc;
    }

    // Moments of the probability measure mu / mu(R).
    double mean() const {
        require_mass();
        return integrate([](double x) { return x; }) / total_mass_;
    }

    double variance() const {
        require_mass();
        const double m1 = mean();
        return integrate([m1](double x) { return (x - m1) * (x - m1); }) / total_mass_;
    }

    // CSV export, schema: k,position,weight
    std::string to_csv() const {
        std::string out = "k,position,weight\n";
        for (const Atom& a : atoms_) {
            out += fmt::number(a.k);
            out.push_back(',');
            out += fmt::number(a.position);
            out.push_back(',');
            out += fmt::number(a.weight);
            out.push_back('\n');
        }
        return out;
    }

private:
    void require_mass() const {
        if (!(total_mass_ > 0.0))
            throw std::domain_error("WeightedMeasure: zero total mass");
    }

    std::vector<Atom> atoms_;
    double total_mass_ = 0.0;
};

template <class Fn>
double integrate(const WeightedMeasure& mu, Fn&& g) {
    return mu.integrate(std::forward<Fn>(g));
}

}  // namespace dising
