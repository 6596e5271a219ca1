#pragma once

#include <cstdint>
#include <string>

#include "wm/mesh.hpp"

namespace wm {

Immersion ellipsoid(MeshPtr mesh, double a, double b, double c);

// Spheroid with equatorial radius a and polar semi-axis c, parametrized
// conformally over the reference sphere (latitudes matched through the
// isothermal coordinate of a surface of revolution).
Immersion conformal_spheroid(MeshPtr mesh, double a, double c);

// Catenoid of neck radius c in conformal coordinates, inverted in the unit
// sphere about the origin. Reference vertex 0 and its antipode are sent to
// the two ends, so both poles land on the origin: the surface is a branched
// immersion there with two sheets through one point.
Immersion inverted_catenoid(MeshPtr mesh, double c = 1.0);

// Radial bump r = 1 + amplitude * exp(-(theta / width)^2), theta measured from vertex `apex`.
Immersion bump_sphere(MeshPtr mesh, double amplitude, double width = 0.3, int apex = 0);

// r = 1 + amplitude * sum_j c_j sin(k_j . p + phi_j), |sum| <= 1, seeded.
Immersion perturbed_sphere(MeshPtr mesh, double amplitude, std::uint64_t seed);

// Unit sphere reparametrized by p -> m(p).
Immersion mobius_sphere(MeshPtr mesh, const MobiusS2& m);

// Unit sphere with the cap z > height pressed flat onto the plane z = height.
Immersion flat_cap_sphere(MeshPtr mesh, double height);

// name: sphere | ellipsoid:a:b:c | inverted-catenoid[:c] | bump-sphere:amp[:width]
//       | conformal-spheroid:a:c | perturbed:amp:seed | mobius-sphere:ax:ay:az | flat-cap:height
Immersion make_fixture(const std::string& name, int level);

}  // namespace wm
