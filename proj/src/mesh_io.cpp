#include "wm/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wm {

namespace {

std::string extension(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string e = path.substr(dot + 1);
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

// next non-empty, non-comment line
bool nextLine(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void checkFaces(const MeshData& m) {
  const int n = static_cast<int>(m.positions.size());
  for (const Face& f : m.faces)
    for (int v : f)
      if (v < 0 || v >= n) throw IOError("face references vertex " + std::to_string(v) + " out of range");
}

}  // namespace

MeshData read_off(std::istream& in) {
  std::string line;
  if (!nextLine(in, line)) throw IOError("empty OFF stream");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic != "OFF") throw IOError("missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(head >> nv)) {
    if (!nextLine(in, line)) throw IOError("truncated OFF header");
    head = std::istringstream(line);
    head >> nv;
  }
  if (!(head >> nf >> ne) || nv < 0 || nf < 0) throw IOError("malformed OFF counts");
  MeshData m;
  m.positions.resize(nv);
  for (long i = 0; i < nv; ++i) {
    if (!nextLine(in, line)) throw IOError("truncated OFF vertex list");
    std::istringstream s(line);
    Vec3& p = m.positions[i];
    if (!(s >> p.x() >> p.y() >> p.z())) throw IOError("malformed OFF vertex " + std::to_string(i));
  }
  m.faces.resize(nf);
  for (long i = 0; i < nf; ++i) {
    if (!nextLine(in, line)) throw IOError("truncated OFF face list");
    std::istringstream s(line);
    int k = 0;
    Face& f = m.faces[i];
    if (!(s >> k >> f[0] >> f[1] >> f[2]) || k != 3) throw IOError("OFF face " + std::to_string(i) + " is not a triangle");
  }
  checkFaces(m);
  return m;
}

MeshData read_obj(std::istream& in) {
  MeshData m;
  std::string line;
  while (nextLine(in, line)) {
    std::istringstream s(line);
    std::string tag;
    s >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(s >> p.x() >> p.y() >> p.z())) throw IOError("malformed OBJ vertex");
      m.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (s >> tok) idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
      if (idx.size() != 3) throw IOError("OBJ face is not a triangle");
      Face f;
      for (int k = 0; k < 3; ++k) f[k] = idx[k] > 0 ? idx[k] - 1 : static_cast<int>(m.positions.size()) + idx[k];
      m.faces.push_back(f);
    }
  }
  checkFaces(m);
  return m;
}

MeshData read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open mesh file " + path);
  const std::string e = extension(path);
  try {
    if (e == "off") return read_off(in);
    if (e == "obj") return read_obj(in);
  } catch (const std::invalid_argument&) {
    throw IOError("malformed index in " + path);
  }
  throw IOError("unknown mesh format: " + path);
}

void write_off(std::ostream& out, const std::vector<Vec3>& positions, const std::vector<Face>& faces) {
  out << "OFF\n" << positions.size() << ' ' << faces.size() << " 0\n";
  for (const Vec3& p : positions) out << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
  for (const Face& f : faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_obj(std::ostream& out, const std::vector<Vec3>& positions, const std::vector<Face>& faces) {
  for (const Vec3& p : positions) out << "v " << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
  for (const Face& f : faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void write_mesh(const std::string& path, const std::vector<Vec3>& positions, const std::vector<Face>& faces) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write mesh file " + path);
  const std::string e = extension(path);
  if (e == "off")
    write_off(out, positions, faces);
  else if (e == "obj")
    write_obj(out, positions, faces);
  else
    throw IOError("unknown mesh format: " + path);
  if (!out) throw IOError("write failed: " + path);
}

}  // namespace wm
