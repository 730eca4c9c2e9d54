#pragma once

#include "flbo/mesh.hpp"

// Procedural test meshes. Everything the validation suite needs is generated
// here so that no dataset files are required.

namespace flbo {

/// Subdivided icosahedron projected to a sphere; 10 * 4^level + 2 vertices.
TriangleMesh make_icosphere(int level, double radius = 1.0);

/// Planar grid in z = 0 covering [0, width] x [0, height], split into nx x ny cells.
TriangleMesh make_flat_grid(int nx, int ny, double width, double height);

/// Unit square split along its (0,0)-(1,1) diagonal.
TriangleMesh make_two_triangle_square();

/// Two unit equilateral triangles sharing an edge (a rhombus).
TriangleMesh make_equilateral_pair();

TriangleMesh make_equilateral_triangle();

/// Regular tetrahedron inscribed in the cube [-1, 1]^3.
TriangleMesh make_tetrahedron();

/// Open cylinder around the z axis, n_around segments and n_along rings of quads.
TriangleMesh make_cylinder(int n_around, int n_along, double radius, double height);

TriangleMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor);

/// Looks up a fixture by name: icosphere0..icosphere5, strip, square, rhombus,
/// triangle, tetrahedron, cylinder, torus. Throws InputError on unknown names.
TriangleMesh make_fixture(const std::string& name);

}  // namespace flbo
