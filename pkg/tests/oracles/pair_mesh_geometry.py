"""Geometry of the two-triangle fixtures used in the mesh tests.

Acute pair: triangles (0,0)-(1,0)-(0.5,0.8) and (0,0)-(1,0)-(0.5,-0.8)
sharing the unit edge on the x-axis.  Cell centers are circumcenters, so
both lie on the perpendicular bisector x=0.5 and the center segment is
orthogonal to the shared edge by construction.

Right pair: unit square cut along its diagonal.  Both circumcenters land
on the hypotenuse midpoint (0.5, 0.5), center distance 0, inadmissible.

Run:  python tests/oracles/pair_mesh_geometry.py
"""
import numpy as np


def circumcenter(p0, p1, p2):
    ax, ay = p0
    bx, by = p1
    cx, cy = p2
    dd = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / dd
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / dd
    return np.array([ux, uy])


if __name__ == "__main__":
    up = circumcenter((0, 0), (1, 0), (0.5, 0.8))
    dn = circumcenter((0, 0), (1, 0), (0.5, -0.8))
    dist = np.linalg.norm(up - dn)
    measure = 1.0  # shared edge (0,0)-(1,0)
    print("acute pair:")
    print("  circumcenters:", up, dn)
    print("  center distance =", dist)
    print("  transmissibility =", measure / dist)
    print("  cell area =", 0.5 * 1.0 * 0.8, "(each)")
    print("  diamond area =", 0.5 * measure * dist)

    a = circumcenter((0, 0), (1, 0), (1, 1))
    b = circumcenter((0, 0), (1, 1), (0, 1))
    print("right pair (unit square cut on the diagonal):")
    print("  circumcenters:", a, b, " -> center distance =", np.linalg.norm(a - b))
