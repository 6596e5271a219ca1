#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <vector>

#include "wm/error.hpp"

namespace wm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Face = std::array<int, 3>;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Genus-0 reference mesh. Vertices are points of the unit sphere.
struct TriangulatedSphere {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  int subdivision_level = -1;  // -1 when not produced by build_icosphere

  int vertexCount() const { return static_cast<int>(vertices.size()); }
  int faceCount() const { return static_cast<int>(faces.size()); }
  int edgeCount() const { return faceCount() * 3 / 2; }
};
using MeshPtr = std::shared_ptr<const TriangulatedSphere>;

// Checks Euler characteristic, edge manifoldness with opposite orientations,
// and that reference points lie on the unit sphere. Throws GeometryError.
void validate_sphere(const TriangulatedSphere& mesh, double radius_tol = 1e-12);

struct Immersion {
  MeshPtr mesh;
  std::vector<Vec3> positions;

  int vertexCount() const { return static_cast<int>(positions.size()); }
};

Immersion make_immersion(MeshPtr mesh, std::vector<Vec3> positions);
// The reference mesh itself as an immersion (the unit round sphere).
Immersion identity_immersion(MeshPtr mesh);

struct DiscreteGeometry {
  std::vector<double> face_areas;
  std::vector<double> vertex_areas;
  std::vector<Vec3> mean_curvature_vec;
  std::vector<double> mean_curvature;
  std::vector<Vec3> normals;
  std::vector<Mat2> second_fundamental;  // frame (u1, n x u1), u1 along the first edge
  std::vector<double> log_conformal;
  std::vector<double> gauss_curvature;
  double total_area = 0.0;
};

struct MobiusR3 {
  enum class Kind { Similarity, Inversion };
  Kind kind = Kind::Similarity;
  Mat3 rotation = Mat3::Identity();
  double log_scale = 0.0;
  Vec3 translation = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double radius = 1.0;

  static MobiusR3 identity() { return {}; }
  static MobiusR3 similarity(const Mat3& rot, double t, const Vec3& b);
  static MobiusR3 dilation(double t) { return similarity(Mat3::Identity(), t, Vec3::Zero()); }
  static MobiusR3 translate(const Vec3& b) { return similarity(Mat3::Identity(), 0.0, b); }
  static MobiusR3 inversion(const Vec3& c, double r);

  Vec3 operator()(const Vec3& x) const;
};

// Conformal automorphism p -> rot * T_a(p) of the unit ball, restricted to S^2.
// T_a sends a to the origin.
struct MobiusS2 {
  Vec3 a = Vec3::Zero();
  Mat3 rot = Mat3::Identity();

  static MobiusS2 identity() { return {}; }
  Vec3 operator()(const Vec3& x) const;
  MobiusS2 inverse() const;
  // (*this) o other
  MobiusS2 compose(const MobiusS2& other) const;
  void check() const;
};

Vec3 ball_translation(const Vec3& a, const Vec3& x);

TriangulatedSphere build_icosphere(int subdivision_level);
MeshPtr icosphere(int subdivision_level);

DiscreteGeometry induced_geometry(const Immersion& im);
Immersion apply_mobius_r3(const Immersion& im, const MobiusR3& m);
TriangulatedSphere apply_mobius_s2(const TriangulatedSphere& mesh, const MobiusS2& m);

// Low-level per-face quantities shared by the other modules.
struct FaceFrame {
  double area = 0.0;
  Vec3 normal = Vec3::Zero();          // unit, right-hand rule on (i0, i1, i2)
  std::array<double, 3> cot{};         // cotangent of the angle at each corner
  std::array<Vec3, 3> grad{};          // gradients of the P1 hat functions
};

std::vector<FaceFrame> face_frames(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                                   bool check_degenerate = true);
std::vector<double> dual_vertex_areas(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                                       const std::vector<FaceFrame>& ff);
SparseMatrix cotan_laplacian(int n, const std::vector<Face>& faces, const std::vector<FaceFrame>& ff);
std::vector<Vec3> vertex_normals(const std::vector<Vec3>& x, const std::vector<Face>& faces);
std::vector<double> angle_defects(const std::vector<Vec3>& x, const std::vector<Face>& faces);
double degeneracy_threshold(const std::vector<FaceFrame>& ff);
double mesh_diameter(const std::vector<Vec3>& x);
double signed_volume(const Immersion& im);
double total_area(const Immersion& im);

// P1 gradient of a per-vertex field on one face: sum_k v_k (x) grad_k.
Mat3 face_gradient(const FaceFrame& f, const Vec3& v0, const Vec3& v1, const Vec3& v2);
Vec3 face_gradient(const FaceFrame& f, double s0, double s1, double s2);

}  // namespace wm
