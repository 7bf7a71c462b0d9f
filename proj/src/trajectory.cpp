// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory JSON-lines: one frame per line,
//   {"t":s,"lp":[x,y,z],"lq":[w,x,y,z],"rp":[...],"rq":[...],"fov":rad,"w":px,"h":px}
// Near/far are not stored; loaded cameras use the Camera defaults.
//
#include "gscache/errors.hpp"
#include "gscache/scene.hpp"

#include <json.hpp>

#include <fstream>

namespace gscache {

using nlohmann::json;

void save_trajectory(const Trajectory &trajectory, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    for (const auto &fr : trajectory.frames) {
        const Camera &l = fr.rig.left;
        const Camera &r = fr.rig.right;
        json j;
        j["t"] = fr.timestamp;
        j["lp"] = {l.position.x, l.position.y, l.position.z};
        j["lq"] = {l.rotation.w, l.rotation.x, l.rotation.y, l.rotation.z};
        j["rp"] = {r.position.x, r.position.y, r.position.z};
        j["rq"] = {r.rotation.w, r.rotation.x, r.rotation.y, r.rotation.z};
        j["fov"] = l.fov_y;
        j["w"] = l.width;
        j["h"] = l.height;
        out << j.dump() << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

Trajectory load_trajectory(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    Trajectory traj;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const json j = json::parse(line);
            auto vec3 = [&](const char *key) {
                const auto &a = j.at(key);
                if (a.size() != 3)
                    throw FormatError(std::string(key) + " must have 3 entries", line_no);
                return Vec3d{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
            };
            auto quat = [&](const char *key) {
                const auto &a = j.at(key);
                if (a.size() != 4)
                    throw FormatError(std::string(key) + " must have 4 entries", line_no);
                return Quatd{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(),
                             a[3].get<double>()};
            };
            TrajectoryFrame fr;
            fr.timestamp = j.at("t").get<double>();
            Camera base;
            base.fov_y = j.at("fov").get<double>();
            base.width = j.at("w").get<int>();
            base.height = j.at("h").get<int>();
            fr.rig.left = base;
            fr.rig.right = base;
            fr.rig.left.position = vec3("lp");
            fr.rig.left.rotation = quat("lq");
            fr.rig.right.position = vec3("rp");
            fr.rig.right.rotation = quat("rq");
            traj.frames.push_back(fr);
        } catch (const json::exception &e) {
            throw FormatError(std::string("trajectory line malformed: ") + e.what(), line_no);
        }
    }
    try {
        traj.validate();
    } catch (const InvalidArgument &e) {
        throw FormatError(e.what(), 0);
    }
    return traj;
}

} // namespace gscache
