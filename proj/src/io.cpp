/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace splatpart {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kRestCoeffs = kShCoeffs - 1;        // 15 per channel
constexpr int kPlyProps = 3 + 3 + 3 + 45 + 1 + 3 + 4; // 62 floats per point
constexpr double kOpacityEps = 1e-12;

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) {
        throw ParseError("cannot open '" + path + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw ParseError("cannot open '" + path + "' for reading");
    }
    return in;
}

/// The de-facto property list, in file order.
std::vector<std::string> ply_property_names() {
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz",
                                      "f_dc_0", "f_dc_1", "f_dc_2"};
    for (int i = 0; i < 45; ++i) {
        names.push_back("f_rest_" + std::to_string(i));
    }
    names.emplace_back("opacity");
    for (int i = 0; i < 3; ++i) {
        names.push_back("scale_" + std::to_string(i));
    }
    for (int i = 0; i < 4; ++i) {
        names.push_back("rot_" + std::to_string(i));
    }
    return names;
}

double logit(double p) {
    const double q = std::clamp(p, kOpacityEps, 1.0 - kOpacityEps);
    return std::log(q / (1.0 - q));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

void write_splat_ply(const std::string& path, const Avatar& avatar) {
    std::ofstream out = open_out(path, std::ios::binary);

    out << "ply\n"
        << "format binary_little_endian 1.0\n"
        << "comment splatpart_splat_version " << kSplatFormatVersion << "\n"
        << "element vertex " << avatar.size() << "\n";
    for (const std::string& name : ply_property_names()) {
        out << "property float " << name << "\n";
    }
    out << "end_header\n";

    std::vector<float> row(kPlyProps);
    for (const GaussianComponent& g : avatar.gaussians) {
        int p = 0;
        for (int i = 0; i < 3; ++i) {
            row[p++] = static_cast<float>(g.mu[i]);
        }
        for (int i = 0; i < 3; ++i) {
            row[p++] = 0.0f; // normals, unused by splats
        }
        for (int c = 0; c < 3; ++c) {
            row[p++] = static_cast<float>(g.sh[c * kShCoeffs]);
        }
        for (int c = 0; c < 3; ++c) {
            for (int i = 1; i < kShCoeffs; ++i) {
                row[p++] = static_cast<float>(g.sh[c * kShCoeffs + i]);
            }
        }
        row[p++] = static_cast<float>(logit(g.opacity));
        for (int i = 0; i < 3; ++i) {
            if (!(g.scale[i] > 0.0)) {
                throw InvalidArgumentError("cannot store non-positive scale in log space");
            }
            row[p++] = static_cast<float>(std::log(g.scale[i]));
        }
        for (int i = 0; i < 4; ++i) {
            row[p++] = static_cast<float>(g.rot[i]);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

std::vector<GaussianComponent> read_splat_ply(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::binary);

    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw ParseError("unexpected end of header in '" + path + "'",
                             static_cast<long long>(in.tellg()));
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
    };

    next_line();
    if (line != "ply") {
        throw ParseError("'" + path + "' is not a PLY file (missing magic)", 0);
    }
    next_line();
    if (line != "format binary_little_endian 1.0") {
        throw ParseError("unsupported PLY format line: '" + line + "'");
    }

    std::size_t count = 0;
    bool have_element = false;
    std::vector<std::string> properties;
    while (true) {
        next_line();
        if (line == "end_header") {
            break;
        }
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "comment") {
            std::string tag;
            ls >> tag;
            if (tag == "splatpart_splat_version") {
                int version = -1;
                ls >> version;
                if (version != kSplatFormatVersion) {
                    throw ParseError("unknown splat format version " + std::to_string(version) +
                                     " in '" + path + "'");
                }
            }
            continue;
        }
        if (word == "element") {
            std::string kind;
            ls >> kind >> count;
            if (kind != "vertex") {
                throw ParseError("unexpected element '" + kind + "' in '" + path + "'");
            }
            have_element = true;
            continue;
        }
        if (word == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float") {
                throw ParseError("property '" + name + "' has type '" + type +
                                 "', expected float");
            }
            properties.push_back(name);
            continue;
        }
        throw ParseError("unrecognized header line: '" + line + "'");
    }
    if (!have_element) {
        throw ParseError("missing 'element vertex' line in '" + path + "'");
    }

    const std::vector<std::string> expected = ply_property_names();
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i >= properties.size()) {
            throw ParseError("missing property '" + expected[i] + "' in '" + path + "'");
        }
        if (properties[i] != expected[i]) {
            throw ParseError("property " + std::to_string(i) + " is '" + properties[i] +
                             "', expected '" + expected[i] + "'");
        }
    }
    if (properties.size() != expected.size()) {
        throw ParseError("unexpected extra property '" + properties[expected.size()] + "' in '" +
                         path + "'");
    }

    const long long data_start = static_cast<long long>(in.tellg());
    std::vector<GaussianComponent> gaussians(count);
    std::vector<float> row(kPlyProps);
    for (std::size_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) {
            throw ParseError("splat file truncated at point " + std::to_string(i) + " of " +
                             std::to_string(count),
                             data_start + static_cast<long long>(i * kPlyProps * sizeof(float)));
        }
        for (int p = 0; p < kPlyProps; ++p) {
            if (!std::isfinite(row[static_cast<std::size_t>(p)])) {
                throw ParseError(
                    "non-finite value for property '" + expected[static_cast<std::size_t>(p)] +
                        "' of point " + std::to_string(i),
                    data_start + static_cast<long long>((i * kPlyProps + static_cast<std::size_t>(p)) *
                                                        sizeof(float)));
            }
        }

        GaussianComponent& g = gaussians[i];
        int p = 0;
        for (int a = 0; a < 3; ++a) {
            g.mu[a] = row[static_cast<std::size_t>(p++)];
        }
        p += 3; // skip normals
        for (int c = 0; c < 3; ++c) {
            g.sh[c * kShCoeffs] = row[static_cast<std::size_t>(p++)];
        }
        for (int c = 0; c < 3; ++c) {
            for (int a = 1; a < kShCoeffs; ++a) {
                g.sh[c * kShCoeffs + a] = row[static_cast<std::size_t>(p++)];
            }
        }
        g.opacity = sigmoid(row[static_cast<std::size_t>(p++)]);
        for (int a = 0; a < 3; ++a) {
            g.scale[a] = std::exp(static_cast<double>(row[static_cast<std::size_t>(p++)]));
        }
        Eigen::Vector4d q;
        for (int a = 0; a < 4; ++a) {
            q[a] = row[static_cast<std::size_t>(p++)];
        }
        if (q.norm() < 1e-12) {
            throw ParseError("zero-norm quaternion at point " + std::to_string(i));
        }
        g.rot = quat_normalized(q);
    }
    return gaussians;
}

void write_binding(const std::string& path, const BindingInfo& info) {
    std::ofstream out = open_out(path);
    out << "splatpart-binding " << kBindingFormatVersion << "\n"
        << "mesh " << (info.mesh_ref.empty() ? "-" : info.mesh_ref) << "\n"
        << "space " << (info.space == CoordinateSpace::Local ? "local" : "global") << "\n"
        << "count " << info.bindings.size() << "\n";
    for (int b : info.bindings) {
        out << b << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

BindingInfo read_binding(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string magic;
    int version = -1;
    in >> magic >> version;
    if (!in || magic != "splatpart-binding") {
        throw ParseError("'" + path + "' is not a binding file");
    }
    if (version != kBindingFormatVersion) {
        throw ParseError("unknown binding format version " + std::to_string(version));
    }

    BindingInfo info;
    std::string key;
    in >> key;
    if (key != "mesh") {
        throw ParseError("binding file missing 'mesh' line");
    }
    std::getline(in >> std::ws, info.mesh_ref);
    if (info.mesh_ref == "-") {
        info.mesh_ref.clear();
    }

    std::string space;
    in >> key >> space;
    if (key != "space" || (space != "local" && space != "global")) {
        throw ParseError("binding file has invalid 'space' line");
    }
    info.space = space == "local" ? CoordinateSpace::Local : CoordinateSpace::Global;

    std::size_t count = 0;
    in >> key >> count;
    if (!in || key != "count") {
        throw ParseError("binding file missing 'count' line");
    }
    info.bindings.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> info.bindings[i])) {
            throw ParseError("binding file ends after " + std::to_string(i) + " of " +
                             std::to_string(count) + " rows");
        }
    }
    return info;
}

void write_mesh_obj(const std::string& path, const Mesh& mesh) {
    std::ofstream out = open_out(path);
    out << "# splatpart mesh\n";
    out.precision(17);
    for (const Eigen::Vector3d& v : mesh.vertices) {
        out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    }
    for (const auto& t : mesh.triangles) {
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

Mesh read_mesh_obj(const std::string& path) {
    std::ifstream in = open_in(path);
    Mesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') {
            continue;
        }
        if (word == "v") {
            Eigen::Vector3d v;
            if (!(ls >> v.x() >> v.y() >> v.z())) {
                throw ParseError("malformed vertex at line " + std::to_string(line_no) + " of '" +
                                 path + "'");
            }
            mesh.vertices.push_back(v);
        } else if (word == "f") {
            std::array<int, 3> tri{};
            std::string vert;
            for (int i = 0; i < 3; ++i) {
                if (!(ls >> vert)) {
                    throw ParseError("face with fewer than 3 vertices at line " +
                                     std::to_string(line_no) + " of '" + path + "'");
                }
                // OBJ faces may carry /vt/vn suffixes; only the vertex id matters.
                tri[static_cast<std::size_t>(i)] = std::stoi(vert.substr(0, vert.find('/'))) - 1;
                if (tri[static_cast<std::size_t>(i)] < 0) {
                    throw ParseError("non-positive vertex index at line " +
                                     std::to_string(line_no) + " of '" + path + "'");
                }
            }
            std::string extra;
            if (ls >> extra) {
                throw ParseError("non-triangle face at line " + std::to_string(line_no) + " of '" +
                                 path + "'");
            }
            mesh.triangles.push_back(tri);
        }
        // Other directives (vn, vt, o, usemtl, ...) are ignored.
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int i : mesh.triangles[t]) {
            if (i >= static_cast<int>(mesh.vertices.size())) {
                throw ParseError("triangle " + std::to_string(t) +
                                 " references missing vertex " + std::to_string(i + 1));
            }
        }
    }
    return mesh;
}

void write_avatar(const std::string& splat_path, const std::string& binding_path,
                  const std::string& mesh_path, const Avatar& avatar) {
    validate_avatar(avatar);
    write_splat_ply(splat_path, avatar);
    BindingInfo info;
    info.mesh_ref = mesh_path;
    info.space = avatar.space;
    info.bindings.reserve(avatar.size());
    for (const GaussianComponent& g : avatar.gaussians) {
        info.bindings.push_back(g.binding);
    }
    write_binding(binding_path, info);
    write_mesh_obj(mesh_path, avatar.mesh);
}

Avatar read_avatar(const std::string& splat_path, const std::string& binding_path,
                   const std::string& mesh_path) {
    Avatar avatar;
    avatar.gaussians = read_splat_ply(splat_path);
    const BindingInfo info = read_binding(binding_path);
    if (info.bindings.size() != avatar.size()) {
        throw ParseError("binding file has " + std::to_string(info.bindings.size()) +
                         " rows but splat file has " + std::to_string(avatar.size()) + " points");
    }
    for (std::size_t i = 0; i < avatar.size(); ++i) {
        avatar.gaussians[i].binding = info.bindings[i];
    }
    avatar.space = info.space;
    avatar.mesh = read_mesh_obj(mesh_path);
    avatar.id = splat_path;
    validate_avatar(avatar);
    return avatar;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out = open_out(path);
    out << "splatpart-labels " << kLabelsFormatVersion << "\n"
        << "count " << labels.size() << "\n";
    for (int l : labels) {
        out << l << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string magic, key;
    int version = -1;
    std::size_t count = 0;
    in >> magic >> version >> key >> count;
    if (!in || magic != "splatpart-labels" || key != "count") {
        throw ParseError("'" + path + "' is not a labels file");
    }
    if (version != kLabelsFormatVersion) {
        throw ParseError("unknown labels format version " + std::to_string(version));
    }
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> labels[i])) {
            throw ParseError("labels file ends after " + std::to_string(i) + " of " +
                             std::to_string(count) + " rows");
        }
    }
    return labels;
}

void write_segmentation(const std::string& path, const Segmentation& seg) {
    std::ofstream out = open_out(path);
    out << "splatpart-segmentation " << kSegmentationFormatVersion << "\n"
        << "avatar " << (seg.avatar_id.empty() ? "-" : seg.avatar_id) << "\n"
        << "channels " << seg.channel_count << "\n"
        << "count " << seg.records.size() << "\n";
    for (std::size_t i = 0; i < seg.records.size(); ++i) {
        out << i << " " << seg.records[i].channel << " " << seg.records[i].cluster << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

Segmentation read_segmentation(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string magic;
    int version = -1;
    in >> magic >> version;
    if (!in || magic != "splatpart-segmentation") {
        throw ParseError("'" + path + "' is not a segmentation file");
    }
    if (version != kSegmentationFormatVersion) {
        throw ParseError("unknown segmentation format version " + std::to_string(version));
    }

    Segmentation seg;
    std::string key;
    in >> key;
    if (key != "avatar") {
        throw ParseError("segmentation file missing 'avatar' line");
    }
    std::getline(in >> std::ws, seg.avatar_id);
    if (seg.avatar_id == "-") {
        seg.avatar_id.clear();
    }
    std::size_t count = 0;
    in >> key >> seg.channel_count;
    if (!in || key != "channels") {
        throw ParseError("segmentation file missing 'channels' line");
    }
    in >> key >> count;
    if (!in || key != "count") {
        throw ParseError("segmentation file missing 'count' line");
    }
    seg.records.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t index = 0;
        SegmentRecord& r = seg.records[i];
        if (!(in >> index >> r.channel >> r.cluster) || index != i) {
            throw ParseError("segmentation row " + std::to_string(i) + " is malformed");
        }
    }
    return seg;
}

namespace {

ordered_json gaussian_to_json(const GaussianComponent& g) {
    ordered_json j;
    j["binding"] = g.binding;
    j["mu"] = {g.mu.x(), g.mu.y(), g.mu.z()};
    j["rot"] = {g.rot[0], g.rot[1], g.rot[2], g.rot[3]};
    j["scale"] = {g.scale.x(), g.scale.y(), g.scale.z()};
    j["opacity"] = g.opacity;
    std::vector<double> sh(g.sh.data(), g.sh.data() + kShDim);
    j["sh"] = sh;
    return j;
}

GaussianComponent gaussian_from_json(const ordered_json& j) {
    GaussianComponent g;
    g.binding = j.at("binding").get<int>();
    for (int i = 0; i < 3; ++i) {
        g.mu[i] = j.at("mu").at(static_cast<std::size_t>(i)).get<double>();
        g.scale[i] = j.at("scale").at(static_cast<std::size_t>(i)).get<double>();
    }
    for (int i = 0; i < 4; ++i) {
        g.rot[i] = j.at("rot").at(static_cast<std::size_t>(i)).get<double>();
    }
    g.opacity = j.at("opacity").get<double>();
    const auto& sh = j.at("sh");
    if (sh.size() != kShDim) {
        throw ParseError("gaussian sh array has " + std::to_string(sh.size()) +
                         " entries, expected " + std::to_string(kShDim));
    }
    for (int i = 0; i < kShDim; ++i) {
        g.sh[i] = sh.at(static_cast<std::size_t>(i)).get<double>();
    }
    return g;
}

} // namespace

void write_segment(const std::string& path, const SegmentArchive& archive) {
    archive.validate();
    ordered_json j;
    j["format"] = "splatpart-segment";
    j["version"] = kSegmentFormatVersion;
    j["source_avatar_id"] = archive.source_avatar_id;
    j["source_triangle_count"] = archive.source_triangle_count;
    j["tag"] = archive.tag;
    j["channel"] = archive.channel;
    j["cluster"] = archive.cluster;
    j["dbscan"] = {{"eps", archive.dbscan.eps}, {"min_samples", archive.dbscan.min_samples}};
    j["triangles"] = archive.triangles;
    ordered_json table = ordered_json::array();
    for (const GaussianComponent& g : archive.gaussians) {
        table.push_back(gaussian_to_json(g));
    }
    j["gaussians"] = std::move(table);

    std::ofstream out = open_out(path);
    out << j.dump(1) << "\n";
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

SegmentArchive read_segment(const std::string& path) {
    std::ifstream in = open_in(path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "splatpart-segment") {
        throw ParseError("'" + path + "' is not a segment archive");
    }
    if (j.value("version", -1) != kSegmentFormatVersion) {
        throw ParseError("unknown segment format version " +
                         std::to_string(j.value("version", -1)));
    }
    SegmentArchive archive;
    try {
        archive.source_avatar_id = j.at("source_avatar_id").get<std::string>();
        archive.source_triangle_count = j.at("source_triangle_count").get<int>();
        archive.tag = j.at("tag").get<std::string>();
        archive.channel = j.at("channel").get<int>();
        archive.cluster = j.at("cluster").get<int>();
        archive.dbscan.eps = j.at("dbscan").at("eps").get<double>();
        archive.dbscan.min_samples = j.at("dbscan").at("min_samples").get<int>();
        archive.triangles = j.at("triangles").get<std::vector<int>>();
        for (const auto& gj : j.at("gaussians")) {
            archive.gaussians.push_back(gaussian_from_json(gj));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("segment archive '" + path + "' is malformed: " + e.what());
    }
    archive.validate();
    return archive;
}

namespace {

constexpr char kCheckpointMagic[] = "splatpartckpt\n";

void write_block(std::ofstream& out, const double* data, std::uint64_t n) {
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_block(std::ifstream& in, const std::string& path) {
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in) {
        throw ParseError("checkpoint '" + path + "' truncated (missing tensor header)",
                         static_cast<long long>(in.tellg()));
    }
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) {
        throw ParseError("checkpoint '" + path + "' truncated (incomplete tensor)",
                         static_cast<long long>(in.tellg()));
    }
    return data;
}

void read_matrix(std::ifstream& in, const std::string& path, Eigen::MatrixXd& m,
                 Eigen::Index rows, Eigen::Index cols) {
    const std::vector<double> data = read_block(in, path);
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ParseError("checkpoint tensor has " + std::to_string(data.size()) +
                         " values, expected " + std::to_string(rows * cols));
    }
    m = Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

void read_vector(std::ifstream& in, const std::string& path, Eigen::VectorXd& v,
                 Eigen::Index size) {
    const std::vector<double> data = read_block(in, path);
    if (static_cast<Eigen::Index>(data.size()) != size) {
        throw ParseError("checkpoint tensor has " + std::to_string(data.size()) +
                         " values, expected " + std::to_string(size));
    }
    v = Eigen::Map<const Eigen::VectorXd>(data.data(), size);
}

ordered_json net_config_to_json(const NetConfig& c) {
    ordered_json j;
    j["hidden_dim"] = c.hidden_dim;
    j["bottleneck_size"] = c.bottleneck_size;
    j["output_dim"] = c.output_dim;
    j["tau_start"] = c.temperature.tau_start;
    j["tau_end"] = c.temperature.tau_end;
    j["anneal_steps"] = c.temperature.anneal_steps;
    j["activation"] = c.activation_kind == ActivationKind::GumbelSoftmax ? "gumbel" : "softmax";
    j["encoder"] = c.encoder_kind == EncoderKind::HashGrid ? "hashgrid" : "xyz";
    j["lambda_usage"] = c.lambda_usage;
    j["lambda_sparsity"] = c.lambda_sparsity;
    j["learning_rate"] = c.learning_rate;
    j["learning_rate_hash"] = c.learning_rate_hash;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["adam_eps"] = c.adam_eps;
    j["batch_size"] = c.batch_size;
    j["total_steps"] = c.total_steps;
    j["seed"] = c.seed;
    j["hash_levels"] = c.hash.levels;
    j["hash_features"] = c.hash.features_per_level;
    j["hash_table_size"] = c.hash.table_size;
    j["hash_base_resolution"] = c.hash.base_resolution;
    j["hash_growth_factor"] = c.hash.growth_factor;
    return j;
}

NetConfig net_config_from_json(const ordered_json& j) {
    NetConfig c;
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.bottleneck_size = j.at("bottleneck_size").get<int>();
    c.output_dim = j.at("output_dim").get<int>();
    c.temperature.tau_start = j.at("tau_start").get<double>();
    c.temperature.tau_end = j.at("tau_end").get<double>();
    c.temperature.anneal_steps = j.at("anneal_steps").get<int>();
    const std::string activation = j.at("activation").get<std::string>();
    if (activation != "gumbel" && activation != "softmax") {
        throw ParseError("unknown activation kind '" + activation + "'");
    }
    c.activation_kind =
        activation == "gumbel" ? ActivationKind::GumbelSoftmax : ActivationKind::PlainSoftmax;
    const std::string encoder = j.at("encoder").get<std::string>();
    if (encoder != "hashgrid" && encoder != "xyz") {
        throw ParseError("unknown encoder kind '" + encoder + "'");
    }
    c.encoder_kind = encoder == "hashgrid" ? EncoderKind::HashGrid : EncoderKind::RawXyz;
    c.lambda_usage = j.at("lambda_usage").get<double>();
    c.lambda_sparsity = j.at("lambda_sparsity").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.learning_rate_hash = j.at("learning_rate_hash").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.total_steps = j.at("total_steps").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hash.levels = j.at("hash_levels").get<int>();
    c.hash.features_per_level = j.at("hash_features").get<int>();
    c.hash.table_size = j.at("hash_table_size").get<std::uint32_t>();
    c.hash.base_resolution = j.at("hash_base_resolution").get<int>();
    c.hash.growth_factor = j.at("hash_growth_factor").get<double>();
    return c;
}

} // namespace

void write_checkpoint(const std::string& path, const DisentangleModel& model) {
    std::ofstream out = open_out(path, std::ios::binary);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const std::uint32_t version = kCheckpointFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));

    ordered_json header = net_config_to_json(model.config);
    header["norm_lo"] = {model.normalization.lo.x(), model.normalization.lo.y(),
                         model.normalization.lo.z()};
    header["norm_extent"] = {model.normalization.extent.x(), model.normalization.extent.y(),
                             model.normalization.extent.z()};
    header["norm_margin"] = model.normalization.margin;
    const std::string header_text = header.dump();
    const std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    for (const std::vector<double>& table : model.hash_state.embeddings) {
        write_block(out, table.data(), table.size());
    }
    write_block(out, model.W1.data(), static_cast<std::uint64_t>(model.W1.size()));
    write_block(out, model.b1.data(), static_cast<std::uint64_t>(model.b1.size()));
    write_block(out, model.W2.data(), static_cast<std::uint64_t>(model.W2.size()));
    write_block(out, model.b2.data(), static_cast<std::uint64_t>(model.b2.size()));
    write_block(out, model.W3.data(), static_cast<std::uint64_t>(model.W3.size()));
    write_block(out, model.b3.data(), static_cast<std::uint64_t>(model.b3.size()));
    write_block(out, model.W4.data(), static_cast<std::uint64_t>(model.W4.size()));
    write_block(out, model.b4.data(), static_cast<std::uint64_t>(model.b4.size()));
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

DisentangleModel read_checkpoint(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    char magic[sizeof(kCheckpointMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw ParseError("'" + path + "' is not a checkpoint file", 0);
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kCheckpointFormatVersion) {
        throw ParseError("unknown checkpoint format version " + std::to_string(version));
    }
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in) {
        throw ParseError("checkpoint '" + path + "' truncated in header",
                         static_cast<long long>(in.tellg()));
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw ParseError("checkpoint '" + path + "' truncated in header",
                         static_cast<long long>(in.tellg()));
    }

    DisentangleModel model;
    try {
        const ordered_json header = ordered_json::parse(header_text);
        model.config = net_config_from_json(header);
        for (int i = 0; i < 3; ++i) {
            model.normalization.lo[i] = header.at("norm_lo").at(static_cast<std::size_t>(i)).get<double>();
            model.normalization.extent[i] =
                header.at("norm_extent").at(static_cast<std::size_t>(i)).get<double>();
        }
        model.normalization.margin = header.at("norm_margin").get<double>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("checkpoint header is malformed: " + std::string(e.what()));
    }
    model.config.validate();

    model.hash_state.config = model.config.hash;
    if (model.config.encoder_kind == EncoderKind::HashGrid) {
        model.hash_state.embeddings.resize(static_cast<std::size_t>(model.config.hash.levels));
        const std::size_t per_level = static_cast<std::size_t>(model.config.hash.table_size) *
                                      static_cast<std::size_t>(model.config.hash.features_per_level);
        for (auto& table : model.hash_state.embeddings) {
            table = read_block(in, path);
            if (table.size() != per_level) {
                throw ParseError("checkpoint embedding table has " + std::to_string(table.size()) +
                                 " values, expected " + std::to_string(per_level));
            }
        }
    }
    const Eigen::Index in_dim = model.config.input_dim();
    const Eigen::Index d = model.config.hidden_dim;
    const Eigen::Index k = model.config.bottleneck_size;
    const Eigen::Index out_dim = model.config.output_dim;
    read_matrix(in, path, model.W1, d, in_dim);
    read_vector(in, path, model.b1, d);
    read_matrix(in, path, model.W2, d, d);
    read_vector(in, path, model.b2, d);
    read_matrix(in, path, model.W3, k, d);
    read_vector(in, path, model.b3, k);
    read_matrix(in, path, model.W4, out_dim, k);
    read_vector(in, path, model.b4, out_dim);
    return model;
}

void write_ppm(const std::string& path, const Image& image) {
    std::ofstream out = open_out(path, std::ios::binary);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> bytes;
    bytes.reserve(image.pixels.size());
    for (double v : image.pixels) {
        bytes.push_back(static_cast<unsigned char>(
            std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ParseError("write failed for '" + path + "'");
    }
}

Image read_ppm(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (!in || magic != "P6" || maxval != 255 || width < 1 || height < 1) {
        throw ParseError("'" + path + "' is not an 8-bit P6 PPM");
    }
    in.get(); // single whitespace byte after the header
    Image img(width, height, Eigen::Vector3d::Zero());
    std::vector<unsigned char> bytes(img.pixels.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) {
        throw ParseError("PPM '" + path + "' truncated", static_cast<long long>(in.tellg()));
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        img.pixels[i] = bytes[i] / 255.0;
    }
    return img;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string describe_net_config(const NetConfig& config) {
    return net_config_to_json(config).dump();
}

} // namespace splatpart
