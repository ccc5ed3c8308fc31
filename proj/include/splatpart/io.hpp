/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/cluster.hpp"
#include "splatpart/error.hpp"
#include "splatpart/net.hpp"
#include "splatpart/render.hpp"
#include "splatpart/swap.hpp"

namespace splatpart {

// Format versions. Readers reject any file tagged with a version they do not
// know; splat PLY files without a version comment are treated as version 1
// for interoperability with files produced by other tools.
inline constexpr int kSplatFormatVersion = 1;
inline constexpr int kBindingFormatVersion = 1;
inline constexpr int kLabelsFormatVersion = 1;
inline constexpr int kSegmentationFormatVersion = 1;
inline constexpr int kSegmentFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

/// Writes the Gaussians in the de-facto splat PLY layout: binary
/// little-endian float32 properties x,y,z, nx,ny,nz (zeros), f_dc_0..2,
/// f_rest_0..44 (channel-major), opacity (logit), scale_0..2 (log),
/// rot_0..3 (scalar first). Positions/scales are written in whatever
/// coordinate space the avatar is in; the binding sidecar records which.
void write_splat_ply(const std::string& path, const Avatar& avatar);

/// Reads a splat PLY with exactly the de-facto layout. Opacity passes
/// through a sigmoid, scales are exponentiated, quaternions normalized.
/// Malformed headers, truncated data, or non-finite values raise ParseError
/// with a byte offset where one is known.
std::vector<GaussianComponent> read_splat_ply(const std::string& path);

/// Sidecar giving each Gaussian its parent triangle, plus the mesh reference
/// and the coordinate space the splat file is expressed in.
struct BindingInfo {
    std::string mesh_ref;
    CoordinateSpace space = CoordinateSpace::Local;
    std::vector<int> bindings;
};

void write_binding(const std::string& path, const BindingInfo& info);
BindingInfo read_binding(const std::string& path);

void write_mesh_obj(const std::string& path, const Mesh& mesh);
Mesh read_mesh_obj(const std::string& path);

/// Writes splat + binding + mesh as one consistent avatar snapshot.
void write_avatar(const std::string& splat_path, const std::string& binding_path,
                  const std::string& mesh_path, const Avatar& avatar);

/// Reads and cross-checks the three files (counts, binding ranges).
Avatar read_avatar(const std::string& splat_path, const std::string& binding_path,
                   const std::string& mesh_path);

/// Plain integer-per-line label table (channel labels, truth labels).
void write_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::string& path);

/// Columnar segmentation table: gaussian index, channel, cluster (-1 noise).
void write_segmentation(const std::string& path, const Segmentation& seg);
Segmentation read_segmentation(const std::string& path);

/// Segment archive container: JSON metadata header plus the Gaussian table.
void write_segment(const std::string& path, const SegmentArchive& archive);
SegmentArchive read_segment(const std::string& path);

/// Binary checkpoint: magic, JSON config/normalization header, then every
/// trainable tensor as length-prefixed float64 little-endian, in a fixed
/// order. Byte-identical for identical models.
void write_checkpoint(const std::string& path, const DisentangleModel& model);
DisentangleModel read_checkpoint(const std::string& path);

/// Binary PPM (P6), 8 bits per channel.
void write_ppm(const std::string& path, const Image& image);
Image read_ppm(const std::string& path);

/// 64-bit FNV-1a over the bytes of `text`; the CLI hashes canonical config
/// strings with it for the reproducibility block.
std::uint64_t fnv1a_hash(const std::string& text);

/// Canonical single-line description of a training configuration. Stable
/// field order, so its hash identifies the configuration.
std::string describe_net_config(const NetConfig& config);

} // namespace splatpart
