#pragma once

#include <string>
#include <vector>

#include "wm/mesh.hpp"

namespace wm {

struct MeshData {
  std::vector<Vec3> positions;
  std::vector<Face> faces;
};

// Format chosen from the extension (.off or .obj). Throws IOError.
MeshData read_mesh(const std::string& path);
void write_mesh(const std::string& path, const std::vector<Vec3>& positions, const std::vector<Face>& faces);

MeshData read_off(std::istream& in);
MeshData read_obj(std::istream& in);
void write_off(std::ostream& out, const std::vector<Vec3>& positions, const std::vector<Face>& faces);
void write_obj(std::ostream& out, const std::vector<Vec3>& positions, const std::vector<Face>& faces);

}  // namespace wm
