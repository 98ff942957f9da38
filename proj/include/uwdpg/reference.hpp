// Conforming Galerkin reference solver for the hypersingular equation:
// continuous piecewise polynomials psi with a(psi, chi) = <V psi', chi'> =
// <f, chi>.  On open curves psi vanishes at the endpoints; on closed curves
// the mean-zero representative is selected by a bordered solve.
#pragma once

#include "uwdpg/layerpot.hpp"
#include "uwdpg/polyspace.hpp"

namespace uwdpg {

struct GalerkinSolution {
  PwPoly psi;          // broken representation of the continuous solution
  double energy = 0.0; // a(psi, psi), nondecreasing under nested refinement
};

// degree >= 1; the basis is nodal hats plus elementwise bubbles (vanishing
// antiderivatives of the element Legendre basis).
GalerkinSolution solve_reference(MeshPtr mesh, int degree, const ScalarField& f,
                                 const QuadPolicy& pol = {});

} // namespace uwdpg
