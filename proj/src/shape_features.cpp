#include "cbmr/shape_features.hpp"

#include <cmath>

#include "cbmr/error.hpp"

namespace cbmr {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = sub(b, a), v = sub(c, a);
  const Vec3 n{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
}

}  // namespace

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return area;
}

Vec3 surface_centroid(const TriangleMesh& mesh) {
  Vec3 sum{0, 0, 0};
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3 &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]], &c = mesh.vertices[f[2]];
    const double w = triangle_area(a, b, c);
    for (int k = 0; k < 3; ++k) sum[k] += w * (a[k] + b[k] + c[k]) / 3.0;
    area += w;
  }
  if (!(area > 0.0)) throw Error(ErrorCode::DegenerateMesh, "mesh has zero surface area");
  return {sum[0] / area, sum[1] / area, sum[2] / area};
}

NormalizedMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) throw Error(ErrorCode::DegenerateMesh, "mesh has no faces");
  for (const auto& f : mesh.faces)
    for (auto idx : f)
      if (idx >= mesh.vertices.size()) throw Error(ErrorCode::DegenerateMesh, "face index out of range");
  const Vec3 centroid = surface_centroid(mesh);
  double radius = 0.0;
  for (const auto& v : mesh.vertices) {
    const Vec3 d = sub(v, centroid);
    radius = std::max(radius, std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
  }
  if (!(radius > 0.0)) throw Error(ErrorCode::DegenerateMesh, "mesh has zero extent");
  NormalizedMesh out;
  out.applied_translation = {-centroid[0], -centroid[1], -centroid[2]};
  out.applied_scale = 1.0 / radius;
  out.mesh.faces = mesh.faces;
  out.mesh.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) {
    const Vec3 d = sub(v, centroid);
    out.mesh.vertices.push_back({d[0] / radius, d[1] / radius, d[2] / radius});
  }
  return out;
}

DescriptorVector sh_descriptor(const NormalizedMesh& mesh, const ShParams& params, kernels::Exec exec) {
  if (mesh.mesh.faces.empty() || !(surface_area(mesh.mesh) > 0.0))
    throw Error(ErrorCode::DegenerateMesh, "mesh has zero surface area");
  // The enclosed volume is filled: a hollow one-voxel shell aliases badly
  // under rotation, a solid does not.
  auto grid = kernels::voxelize_surface(mesh.mesh, params.voxels, exec);
  kernels::fill_enclosed(grid);
  DescriptorVector out{std::string(category::kSphericalHarmonics), kernels::shell_energies(grid, params.sampling, exec),
                       {}};
  return out;
}

}  // namespace cbmr
