#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adlearn/error.hpp"

namespace adl::data {

// Feature schema: ordinal time stamp, per-building image histograms, and a
// trailing window of hourly meteorological measurements.
inline constexpr int kTimeDim = 4;                                // month, day, hour, quarter
inline constexpr int kSpaceChannels = 3;                          // image channels (r, g, b)
inline constexpr int kSpaceBins = 100;                            // histogram bins per channel
inline constexpr int kSpaceDim = kSpaceChannels * kSpaceBins;     // 300
inline constexpr int kMetChannels = 9;
inline constexpr int kMetWindow = 24;                             // trailing hours
inline constexpr int kSpaceTimeDim = kMetChannels * kMetWindow;   // 216
inline constexpr int kFeatureDim = kTimeDim + kSpaceDim + kSpaceTimeDim; // 520
inline constexpr int kLabelDim = 96;                              // next 24 h at 15 min
inline constexpr double kHistogramPixels = 10000.0;               // per-channel pixel count

extern const char* const kMetChannelNames[kMetChannels];

struct TimePoint {
    int month = 1;   // [1, 12]
    int day = 1;     // [1, 31]
    int hour = 0;    // [0, 23]
    int quarter = 0; // [0, 3]
    bool operator==(const TimePoint&) const = default;
};

struct Building {
    uint32_t id = 0;
    double lat = 0.0;          // [-90, 90]
    double lon = 0.0;          // [-180, 180]
    uint32_t region_cluster = 0; // buildings in one region share meteorology
    uint32_t archetype = 0;
};

struct Dataset {
    struct PointRef {
        uint32_t building = 0;   // index into buildings
        uint32_t timestamp = 0;  // index into timestamps
    };

    std::vector<Building> buildings;
    std::vector<TimePoint> timestamps;
    std::vector<PointRef> points;
    std::vector<double> features; // points x kFeatureDim, row-major
    std::vector<double> labels;   // points x kLabelDim, row-major

    size_t size() const { return points.size(); }
    std::span<const double> feature_row(size_t i) const {
        return {features.data() + i * kFeatureDim, size_t(kFeatureDim)};
    }
    std::span<const double> label_row(size_t i) const {
        return {labels.data() + i * kLabelDim, size_t(kLabelDim)};
    }
};

// slices of one feature row
std::span<const double> time_slice(std::span<const double> x);
std::span<const double> space_slice(std::span<const double> x);
std::span<const double> space_time_slice(std::span<const double> x);

struct SyntheticConfig {
    int n_buildings = 40;
    int n_timestamps = 200;
    double noise_scale = 0.05;
    double shift_strength = 1.0; // scales building- and month-level distribution shift
    uint64_t seed = 0;
    void validate() const;
};

// Full buildings x timestamps grid with archetype-dependent histograms,
// per-region weather series, and loads driven by all three feature groups.
Dataset generate_synthetic(const SyntheticConfig& cfg);

enum class PredictionType { InSample, Spatial, Temporal, SpatioTemporal };

const char* prediction_type_name(PredictionType t);

// Buildings and timestamps represented in the initially available set.
struct AvailIndex {
    std::vector<bool> building_seen;  // by building index
    std::vector<bool> timestamp_seen; // by timestamp index
};

AvailIndex make_avail_index(const Dataset& data, std::span<const uint32_t> avail_points);

PredictionType classify_prediction_type(const Dataset& data, Dataset::PointRef point,
                                        const AvailIndex& avail);

struct NormStats {
    bool fitted = false;
    std::vector<double> feat_mean, feat_scale;
    std::vector<double> label_mean, label_scale;
    std::vector<uint32_t> feat_passthrough;  // zero-variance feature dims, kept at unit scale
    std::vector<uint32_t> label_passthrough;
};

struct DatasetSplits {
    Dataset data;
    std::vector<uint32_t> avail;           // initial training points
    std::vector<uint32_t> val;             // early-stopping validation points
    std::vector<uint32_t> spatial;         // unseen building, seen timestamp
    std::vector<uint32_t> temporal;        // seen building, unseen timestamp
    std::vector<uint32_t> spatio_temporal; // both unseen
    NormStats norm;

    std::span<const uint32_t> partition(PredictionType t) const;
};

// Picks ~30% of buildings (spanning all archetypes) and ~30% of timestamps
// as "seen"; the seen x seen block splits into ~3% available / ~6%
// validation of the full dataset, and the remaining points partition into
// the three candidate pools (~23% / 23% / 54% of the candidates).
DatasetSplits split(Dataset dataset, uint64_t seed);

// Standardizes features and labels in place with statistics fitted on the
// available split only. Zero-variance dims pass through at unit scale.
void normalize(DatasetSplits& splits);

std::vector<double> normalize_features(const NormStats& norm, std::span<const double> x);
std::vector<double> inverse_features(const NormStats& norm, std::span<const double> x);
std::vector<double> normalize_label(const NormStats& norm, std::span<const double> y);
std::vector<double> inverse_label(const NormStats& norm, std::span<const double> y);

void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);
void export_csv(const Dataset& data, const std::string& path);

void save_splits(const DatasetSplits& splits, const std::string& path);
DatasetSplits load_splits(const std::string& path);

} // namespace adl::data
