#pragma once

#include <random>

#include "jordanflow/flag.hpp"
#include "test_support.hpp"

namespace jflow::testing {

inline Flag random_flag(std::mt19937_64& rng, const FlagType& type) {
    return Flag::from_basis(type, random_matrix(rng, type.n, type.dims.back()));
}

/// Basis with round-off entries flushed to zero, so coordinate-aligned
/// eigenspaces are represented exactly. Lower cells are unstable: a 1e-16
/// error grows like e^{gap·t} and would otherwise dominate long simulations.
inline RealMatrix snapped(RealMatrix B) {
    B = B.unaryExpr([](double x) { return std::abs(x) < 1e-13 ? 0.0 : x; });
    for (Eigen::Index j = 0; j < B.cols(); ++j) B.col(j).normalize();
    return B;
}

/// A random flag whose forward limit lies in component c: every slot of
/// rate space j is a random vector of E_j plus random slower terms.
inline Flag random_flag_in_cell(std::mt19937_64& rng, const LinearFlow& flow, const FlagType& type,
                                const FlagMorseComponent& c) {
    const auto& spaces = flow.rate_spaces();
    RealMatrix B(type.n, type.dims.back());
    Eigen::Index col = 0;
    for (int i = 0; i < type.length(); ++i)
        for (std::size_t j = 0; j < spaces.size(); ++j)
            for (int r = 0; r < c.cells[static_cast<std::size_t>(i)][j]; ++r) {
                RealVector v = snapped(spaces[j].basis) * random_matrix(rng, spaces[j].dimension, 1);
                for (std::size_t k = j + 1; k < spaces.size(); ++k)
                    v += snapped(spaces[k].basis) * random_matrix(rng, spaces[k].dimension, 1);
                B.col(col++) = v;
            }
    return Flag::from_basis(type, B);
}

} // namespace jflow::testing
