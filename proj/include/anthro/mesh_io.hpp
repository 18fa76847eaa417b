// OBJ-subset mesh I/O and joints JSON I/O.
//
// The OBJ subset is: `v x y z` and triangulated `f i j k` records (1-based
// indices, `i/t/n` forms accepted with the texture/normal parts ignored).
// Everything else a sane OBJ may contain (comments, normals, texcoords,
// groups, materials) is skipped.
#pragma once

#include <string>

#include "anthro/types.hpp"

namespace anthro {

TriMesh load_mesh(const std::string& path);

// Writes v/f records with round-trip exact coordinates (%.17g). `header`
// lines, if any, are emitted as leading `#` comments.
void save_mesh(const TriMesh& mesh, const std::string& path,
               const std::string& header = {});

// Joints file: a JSON object mapping joint names to [x, y, z] arrays.
JointSet load_joints(const std::string& path);
void save_joints(const JointSet& joints, const std::string& path,
                 const std::string& provenance = {});

}  // namespace anthro
