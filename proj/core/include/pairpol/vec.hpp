#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pairpol {

using Vec3 = Eigen::Vector3d;

//! Orthonormal pair (u, v) perpendicular to a unit direction, with u x v = k.
struct TransverseFrame
{
    Vec3 u;
    Vec3 v;
};

/*!
 * Build a deterministic transverse frame for a unit direction.
 *
 * The first axis is the coordinate axis least aligned with the direction
 * (first index wins ties), projected and normalized. This keeps the frame
 * well defined for every direction including the poles.
 */
inline TransverseFrame transverse_frame(Vec3 const& k)
{
    int axis = 0;
    for (int i = 1; i < 3; ++i)
    {
        if (std::abs(k[i]) < std::abs(k[axis]))
            axis = i;
    }
    Vec3 e = Vec3::Unit(axis);
    Vec3 u = (e - e.dot(k) * k).normalized();
    Vec3 v = k.cross(u);
    return {u, v};
}

//! Unit vector from polar angle and azimuth about +z
inline Vec3 from_spherical(double theta, double phi)
{
    double const s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

}  // namespace pairpol
