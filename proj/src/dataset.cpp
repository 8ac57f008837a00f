#include "adlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "adlearn/binio.hpp"
#include "adlearn/rng.hpp"

namespace adl::data {

const char* const kMetChannelNames[kMetChannels] = {
    "air_density", "cloud_cover", "precipitation", "irradiance_surface", "irradiance_toa",
    "temperature", "snowfall", "snow_mass", "wind_speed",
};

namespace {

constexpr char kDatasetMagic[4] = {'A', 'D', 'L', 'D'};
constexpr char kSplitsMagic[4] = {'A', 'D', 'L', 'S'};
constexpr uint32_t kDatasetVersion = 1;
constexpr uint32_t kSplitsVersion = 1;

constexpr double kPi = 3.141592653589793238462643383279502884;

// synthetic calendar: 12 months x 28 days x 24 hours
constexpr int kDaysPerMonth = 28;
constexpr int kYearHours = 12 * kDaysPerMonth * 24;

// seed streams of the generator
enum : uint64_t { SgBuilding = 11, SgTimestamps = 12, SgRegion = 13, SgPoint = 14 };

struct ArchetypeParams {
    double hist_center[kSpaceChannels]; // histogram bump position per channel
    double hist_width[kSpaceChannels];
    double diurnal_peak;   // hour of peak load
    double diurnal_amp;
    double season_peak;    // month of peak load shift
    double season_coeff;   // scaled by shift_strength
    double building_coeff; // building-level shift, scaled by shift_strength
    double weather_sens;   // response to temperature deviations
};

// residential / commercial / industrial
const ArchetypeParams kArchetypes[3] = {
    {{20, 35, 50}, {8, 10, 9}, 19.0, 0.40, 12.0, 0.30, 0.30, 0.25},
    {{55, 60, 70}, {12, 9, 11}, 13.0, 0.35, 6.0, 0.35, 0.50, 0.15},
    {{80, 25, 40}, {7, 13, 8}, 7.0, 0.25, 3.0, 0.50, 0.90, 0.35},
};

// archetype mix is deliberately imbalanced (6/3/1 per ten buildings)erlebt
uint32_t archetype_of(int b) {
    const int r = b % 10;
    if (r < 6) return 0;
    if (r < 9) return 1;
    return 2;
}

struct MetChannelParams {
    double base, season_amp, diurnal_amp;
};

const MetChannelParams kMetParams[kMetChannels] = {
    {1.2, 0.05, 0.02},   // air_density
    {0.5, 0.2, 0.1},     // cloud_cover
    {1.0, 0.5, 0.3},     // precipitation
    {300.0, 150.0, 200.0}, // irradiance_surface
    {800.0, 200.0, 250.0}, // irradiance_toa
    {10.0, 8.0, 4.0},    // temperature
    {0.3, 0.25, 0.05},   // snowfall
    {5.0, 4.0, 0.5},     // snow_mass
    {4.0, 1.5, 1.0},     // wind_speed
};

constexpr int kTemperatureChannel = 5;

struct RegionWeather {
    double season_phase[kMetChannels];
    double diurnal_phase[kMetChannels];
};

double met_value(const RegionWeather& rw, int channel, double hour) {
    const MetChannelParams& p = kMetParams[channel];
    double h = std::fmod(hour, double(kYearHours));
    if (h < 0) h += kYearHours;
    return p.base + p.season_amp * std::sin(2.0 * kPi * h / kYearHours + rw.season_phase[channel])
           + p.diurnal_amp * std::sin(2.0 * kPi * std::fmod(h, 24.0) / 24.0 + rw.diurnal_phase[channel]);
}

int abs_hour(const TimePoint& t) {
    return ((t.month - 1) * kDaysPerMonth + (t.day - 1)) * 24 + t.hour;
}

} // namespace

std::span<const double> time_slice(std::span<const double> x) {
    return x.subspan(0, kTimeDim);
}
std::span<const double> space_slice(std::span<const double> x) {
    return x.subspan(kTimeDim, kSpaceDim);
}
std::span<const double> space_time_slice(std::span<const double> x) {
    return x.subspan(kTimeDim + kSpaceDim, kSpaceTimeDim);
}

void SyntheticConfig::validate() const {
    if (n_buildings < 2)
        throw Error(ErrorCode::InvalidArgument, "n_buildings must be >= 2");
    if (n_timestamps < 2)
        throw Error(ErrorCode::InvalidArgument, "n_timestamps must be >= 2");
    if (n_timestamps > 12 * kDaysPerMonth * 24 * 4)
        throw Error(ErrorCode::InvalidArgument, "n_timestamps exceeds the timestamp grid");
    if (noise_scale < 0.0)
        throw Error(ErrorCode::InvalidArgument, "noise_scale must be >= 0");
    if (shift_strength < 0.0 || shift_strength > 1.0)
        throw Error(ErrorCode::InvalidArgument, "shift_strength must be in [0, 1]");
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Dataset ds;
    const int B = cfg.n_buildings, T = cfg.n_timestamps;
    const int n_regions = std::max(2, (B + 4) / 5);

    // regions: weather phases + a coordinate grid cell
    std::vector<RegionWeather> regions(n_regions);
    for (int r = 0; r < n_regions; ++r) {
        Rng rng(derive_seed(cfg.seed, SgRegion, uint64_t(r)));
        for (int c = 0; c < kMetChannels; ++c) {
            regions[r].season_phase[c] = rng.uniform(0.0, 2.0 * kPi);
            regions[r].diurnal_phase[c] = rng.uniform(0.0, 2.0 * kPi);
        }
    }

    // buildings: archetype-shaped histograms with per-building jitter so the
    // space features identify the building
    ds.buildings.resize(B);
    std::vector<double> histograms(size_t(B) * kSpaceDim);
    std::vector<double> building_effect(B); // bounded shift term
    for (int b = 0; b < B; ++b) {
        Rng rng(derive_seed(cfg.seed, SgBuilding, uint64_t(b)));
        Building& bd = ds.buildings[b];
        bd.id = uint32_t(b);
        bd.archetype = archetype_of(b);
        bd.region_cluster = uint32_t(b % n_regions);
        bd.lat = 46.0 + 0.08 * double(bd.region_cluster % 16) + rng.uniform(-0.004, 0.004);
        bd.lon = 7.0 + 0.08 * double(bd.region_cluster / 16) + rng.uniform(-0.004, 0.004);

        const ArchetypeParams& a = kArchetypes[bd.archetype];
        building_effect[b] = a.building_coeff * std::tanh(rng.normal()) * 0.8;
        for (int c = 0; c < kSpaceChannels; ++c) {
            const double center = a.hist_center[c] + rng.uniform(-8.0, 8.0);
            const double width = a.hist_width[c] * rng.uniform(0.8, 1.2);
            double* bins = histograms.data() + (size_t(b) * kSpaceChannels + c) * kSpaceBins;
            double total = 0.0;
            for (int i = 0; i < kSpaceBins; ++i) {
                const double z = (i - center) / width;
                bins[i] = 0.02 + std::exp(-0.5 * z * z);
                total += bins[i];
            }
            for (int i = 0; i < kSpaceBins; ++i) bins[i] *= kHistogramPixels / total;
        }
    }

    // distinct timestamps, sampled from the calendar grid and kept in
    // chronological order
    {
        Rng rng(derive_seed(cfg.seed, SgTimestamps));
        const int grid = 12 * kDaysPerMonth * 24 * 4;
        std::vector<size_t> picks = rng.sample_without_replacement(size_t(grid), size_t(T));
        std::sort(picks.begin(), picks.end());
        ds.timestamps.resize(T);
        for (int t = 0; t < T; ++t) {
            size_t v = picks[t];
            TimePoint& tp = ds.timestamps[t];
            tp.quarter = int(v % 4);
            v /= 4;
            tp.hour = int(v % 24);
            v /= 24;
            tp.day = int(v % kDaysPerMonth) + 1;
            v /= kDaysPerMonth;
            tp.month = int(v) + 1;
        }
    }

    const size_t n_points = size_t(B) * size_t(T);
    ds.points.resize(n_points);
    ds.features.assign(n_points * kFeatureDim, 0.0);
    ds.labels.assign(n_points * kLabelDim, 0.0);

    for (int b = 0; b < B; ++b) {
        const Building& bd = ds.buildings[b];
        const ArchetypeParams& a = kArchetypes[bd.archetype];
        const RegionWeather& rw = regions[bd.region_cluster];
        for (int t = 0; t < T; ++t) {
            const size_t p = size_t(b) * T + t;
            ds.points[p] = {uint32_t(b), uint32_t(t)};
            const TimePoint& tp = ds.timestamps[t];
            double* x = ds.features.data() + p * kFeatureDim;

            // time stamp ordinals, min-max scaled to [0, 1]
            x[0] = double(tp.month - 1) / 11.0;
            x[1] = double(tp.day - 1) / double(kDaysPerMonth - 1);
            x[2] = double(tp.hour) / 23.0;
            x[3] = double(tp.quarter) / 3.0;

            std::copy_n(histograms.data() + size_t(b) * kSpaceDim, kSpaceDim, x + kTimeDim);

            // trailing 24 hourly weather values ending at the timestamp
            const int H = abs_hour(tp);
            for (int c = 0; c < kMetChannels; ++c)
                for (int j = 0; j < kMetWindow; ++j)
                    x[kTimeDim + kSpaceDim + c * kMetWindow + j] =
                        met_value(rw, c, double(H - (kMetWindow - 1) + j));

            // load profile for the next 24 hours in 15-min steps
            Rng noise(derive_seed(cfg.seed, SgPoint, uint64_t(p)));
            const double season = 1.0 + cfg.shift_strength * a.season_coeff
                                  * std::sin(2.0 * kPi * (tp.month - a.season_peak) / 12.0);
            const double bshift = 1.0 + cfg.shift_strength * building_effect[b];
            double* y = ds.labels.data() + p * kLabelDim;
            for (int j = 0; j < kLabelDim; ++j) {
                const double fh = double(H) + 0.25 * tp.quarter + 0.25 * j;
                const double hod = std::fmod(fh, 24.0);
                const double profile =
                    1.0 + a.diurnal_amp * std::sin(2.0 * kPi * (hod - a.diurnal_peak) / 24.0);
                const double temp_dev =
                    (met_value(rw, kTemperatureChannel, fh) - kMetParams[kTemperatureChannel].base)
                    / kMetParams[kTemperatureChannel].season_amp;
                const double weather = 1.0 + a.weather_sens * temp_dev;
                double v = profile * season * bshift * weather + cfg.noise_scale * noise.normal();
                y[j] = v > 0.0 ? v : 0.0;
            }
        }
    }
    return ds;
}

const char* prediction_type_name(PredictionType t) {
    switch (t) {
        case PredictionType::InSample: return "in_sample";
        case PredictionType::Spatial: return "spatial";
        case PredictionType::Temporal: return "temporal";
        case PredictionType::SpatioTemporal: return "spatio_temporal";
    }
    return "unknown";
}

AvailIndex make_avail_index(const Dataset& data, std::span<const uint32_t> avail_points) {
    AvailIndex idx;
    idx.building_seen.assign(data.buildings.size(), false);
    idx.timestamp_seen.assign(data.timestamps.size(), false);
    for (uint32_t p : avail_points) {
        idx.building_seen[data.points[p].building] = true;
        idx.timestamp_seen[data.points[p].timestamp] = true;
    }
    return idx;
}

PredictionType classify_prediction_type(const Dataset& data, Dataset::PointRef point,
                                        const AvailIndex& avail) {
    (void)data;
    const bool b = avail.building_seen[point.building];
    const bool t = avail.timestamp_seen[point.timestamp];
    if (b && t) return PredictionType::InSample;
    if (!b && t) return PredictionType::Spatial;
    if (b && !t) return PredictionType::Temporal;
    return PredictionType::SpatioTemporal;
}

std::span<const uint32_t> DatasetSplits::partition(PredictionType t) const {
    switch (t) {
        case PredictionType::Spatial: return spatial;
        case PredictionType::Temporal: return temporal;
        case PredictionType::SpatioTemporal: return spatio_temporal;
        case PredictionType::InSample: break;
    }
    throw Error(ErrorCode::InvalidArgument, "no candidate partition for prediction type");
}

DatasetSplits split(Dataset dataset, uint64_t seed) {
    const size_t N = dataset.size();
    const size_t B = dataset.buildings.size();
    const size_t T = dataset.timestamps.size();
    if (B < 2)
        throw Error(ErrorCode::InvalidArgument, "split: need at least 2 buildings");
    if (T < 2)
        throw Error(ErrorCode::InvalidArgument, "split: need at least 2 timestamps");

    auto share = [](size_t n, double f, size_t lo, size_t hi) {
        size_t v = size_t(std::llround(f * double(n)));
        return std::max(lo, std::min(hi, v));
    };
    const size_t seen_b = share(B, 0.3, 1, B - 1);
    const size_t seen_t = share(T, 0.3, 1, T - 1);
    const size_t n_avail = size_t(std::llround(0.03 * double(N)));
    if (n_avail < std::max(seen_b, seen_t))
        throw Error(ErrorCode::InvalidArgument,
                    "split: 3% initial-training share (" + std::to_string(n_avail)
                    + " points) cannot cover " + std::to_string(seen_b) + " seen buildings and "
                    + std::to_string(seen_t) + " seen timestamps; dataset too small");

    Rng rng(derive_seed(seed, 21));

    // seen buildings: stratified over archetypes so every archetype that
    // exists is represented in the initial training data
    std::vector<bool> b_seen(B, false);
    {
        std::map<uint32_t, std::vector<uint32_t>> by_arch;
        for (size_t b = 0; b < B; ++b) by_arch[dataset.buildings[b].archetype].push_back(uint32_t(b));
        std::vector<std::vector<uint32_t>> groups;
        for (auto& [arch, members] : by_arch) {
            rng.shuffle(members);
            groups.push_back(members);
        }
        size_t chosen = 0;
        for (size_t round = 0; chosen < seen_b; ++round) {
            bool any = false;
            for (auto& g : groups) {
                if (round < g.size() && chosen < seen_b) {
                    b_seen[g[round]] = true;
                    ++chosen;
                    any = true;
                }
            }
            if (!any) break;
        }
    }

    std::vector<bool> t_seen(T, false);
    for (size_t i : rng.sample_without_replacement(T, seen_t)) t_seen[i] = true;

    DatasetSplits sp;
    std::vector<uint32_t> in_sample;
    for (size_t p = 0; p < N; ++p) {
        const bool bs = b_seen[dataset.points[p].building];
        const bool ts = t_seen[dataset.points[p].timestamp];
        if (bs && ts)
            in_sample.push_back(uint32_t(p));
        else if (!bs && ts)
            sp.spatial.push_back(uint32_t(p));
        else if (bs && !ts)
            sp.temporal.push_back(uint32_t(p));
        else
            sp.spatio_temporal.push_back(uint32_t(p));
    }
    if (in_sample.size() <= n_avail)
        throw Error(ErrorCode::InvalidArgument,
                    "split: seen-block too small, no points left for validation");
    for (auto [name, part] : {std::pair<const char*, const std::vector<uint32_t>*>{"spatial", &sp.spatial},
                              {"temporal", &sp.temporal},
                              {"spatio_temporal", &sp.spatio_temporal}})
        if (part->empty())
            throw Error(ErrorCode::InvalidArgument,
                        std::string("split: empty ") + name + " candidate partition");

    // available points: cover every seen timestamp and building, then fill
    std::vector<bool> used(in_sample.size(), false);
    std::vector<bool> b_covered(B, false), t_covered(T, false);
    std::vector<std::vector<size_t>> by_t(T), by_b(B);
    for (size_t i = 0; i < in_sample.size(); ++i) {
        by_t[dataset.points[in_sample[i]].timestamp].push_back(i);
        by_b[dataset.points[in_sample[i]].building].push_back(i);
    }
    std::vector<uint32_t> avail;
    auto take = [&](size_t i) {
        used[i] = true;
        avail.push_back(in_sample[i]);
        b_covered[dataset.points[in_sample[i]].building] = true;
        t_covered[dataset.points[in_sample[i]].timestamp] = true;
    };
    std::vector<size_t> t_order;
    for (size_t t = 0; t < T; ++t)
        if (t_seen[t]) t_order.push_back(t);
    rng.shuffle(t_order);
    for (size_t t : t_order) {
        std::vector<size_t> fresh, any;
        for (size_t i : by_t[t]) {
            if (used[i]) continue;
            any.push_back(i);
            if (!b_covered[dataset.points[in_sample[i]].building]) fresh.push_back(i);
        }
        const std::vector<size_t>& pool = fresh.empty() ? any : fresh;
        if (!pool.empty()) take(pool[size_t(rng.below(pool.size()))]);
    }
    for (size_t b = 0; b < B; ++b) {
        if (!b_seen[b] || b_covered[b]) continue;
        std::vector<size_t> cand;
        for (size_t i : by_b[b])
            if (!used[i]) cand.push_back(i);
        if (cand.empty())
            throw Error(ErrorCode::InvalidArgument,
                        "split: cannot cover building " + std::to_string(b)
                        + " within the initial-training share");
        take(cand[size_t(rng.below(cand.size()))]);
    }
    if (avail.size() > n_avail)
        throw Error(ErrorCode::InvalidArgument,
                    "split: covering the seen buildings/timestamps needs "
                    + std::to_string(avail.size()) + " points, more than the 3% share of "
                    + std::to_string(n_avail));
    {
        std::vector<size_t> rest;
        for (size_t i = 0; i < in_sample.size(); ++i)
            if (!used[i]) rest.push_back(i);
        rng.shuffle(rest);
        for (size_t i : rest) {
            if (avail.size() >= n_avail) break;
            take(i);
        }
    }

    sp.avail = std::move(avail);
    for (size_t i = 0; i < in_sample.size(); ++i)
        if (!used[i]) sp.val.push_back(in_sample[i]);

    std::sort(sp.avail.begin(), sp.avail.end());
    std::sort(sp.val.begin(), sp.val.end());
    sp.data = std::move(dataset);
    return sp;
}

namespace {

void fit_stats(const Dataset& data, std::span<const uint32_t> rows, bool labels,
               std::vector<double>& mean, std::vector<double>& scale,
               std::vector<uint32_t>& passthrough) {
    const size_t dim = labels ? kLabelDim : kFeatureDim;
    mean.assign(dim, 0.0);
    scale.assign(dim, 1.0);
    std::vector<double> sq(dim, 0.0);
    for (uint32_t r : rows) {
        std::span<const double> v = labels ? data.label_row(r) : data.feature_row(r);
        for (size_t d = 0; d < dim; ++d) {
            mean[d] += v[d];
            sq[d] += v[d] * v[d];
        }
    }
    const double n = double(rows.size());
    for (size_t d = 0; d < dim; ++d) {
        mean[d] /= n;
        const double var = std::max(0.0, sq[d] / n - mean[d] * mean[d]);
        const double sd = std::sqrt(var);
        if (sd < 1e-12) {
            scale[d] = 1.0;
            passthrough.push_back(uint32_t(d));
        } else {
            scale[d] = sd;
        }
    }
}

} // namespace

void normalize(DatasetSplits& splits) {
    if (splits.norm.fitted)
        throw Error(ErrorCode::InvalidArgument, "normalize: splits already normalized");
    if (splits.avail.empty())
        throw Error(ErrorCode::InvalidArgument, "normalize: empty available split");
    NormStats& ns = splits.norm;
    fit_stats(splits.data, splits.avail, false, ns.feat_mean, ns.feat_scale, ns.feat_passthrough);
    fit_stats(splits.data, splits.avail, true, ns.label_mean, ns.label_scale, ns.label_passthrough);
    ns.fitted = true;

    for (size_t p = 0; p < splits.data.size(); ++p) {
        double* x = splits.data.features.data() + p * kFeatureDim;
        for (size_t d = 0; d < size_t(kFeatureDim); ++d)
            x[d] = (x[d] - ns.feat_mean[d]) / ns.feat_scale[d];
        double* y = splits.data.labels.data() + p * kLabelDim;
        for (size_t d = 0; d < size_t(kLabelDim); ++d)
            y[d] = (y[d] - ns.label_mean[d]) / ns.label_scale[d];
    }
}

namespace {

std::vector<double> affine(std::span<const double> v, const std::vector<double>& mean,
                           const std::vector<double>& scale, bool forward) {
    if (v.size() != mean.size())
        throw Error(ErrorCode::InvalidArgument, "normalization: length mismatch");
    std::vector<double> out(v.size());
    for (size_t d = 0; d < v.size(); ++d)
        out[d] = forward ? (v[d] - mean[d]) / scale[d] : v[d] * scale[d] + mean[d];
    return out;
}

void require_fitted(const NormStats& norm) {
    if (!norm.fitted)
        throw Error(ErrorCode::InvalidArgument, "normalization statistics not fitted");
}

} // namespace

std::vector<double> normalize_features(const NormStats& norm, std::span<const double> x) {
    require_fitted(norm);
    return affine(x, norm.feat_mean, norm.feat_scale, true);
}
std::vector<double> inverse_features(const NormStats& norm, std::span<const double> x) {
    require_fitted(norm);
    return affine(x, norm.feat_mean, norm.feat_scale, false);
}
std::vector<double> normalize_label(const NormStats& norm, std::span<const double> y) {
    require_fitted(norm);
    return affine(y, norm.label_mean, norm.label_scale, true);
}
std::vector<double> inverse_label(const NormStats& norm, std::span<const double> y) {
    require_fitted(norm);
    return affine(y, norm.label_mean, norm.label_scale, false);
}

namespace {

void write_dataset_body(std::ostream& os, const Dataset& data) {
    binio::write_magic(os, kDatasetMagic);
    binio::write_u32(os, kDatasetVersion);
    binio::write_u32(os, uint32_t(data.buildings.size()));
    binio::write_u32(os, uint32_t(data.timestamps.size()));
    binio::write_u32(os, uint32_t(data.points.size()));
    binio::write_u32(os, uint32_t(kTimeDim));
    binio::write_u32(os, uint32_t(kSpaceDim));
    binio::write_u32(os, uint32_t(kSpaceTimeDim));
    binio::write_u32(os, uint32_t(kLabelDim));
    for (const Building& b : data.buildings) {
        binio::write_f64(os, double(b.id));
        binio::write_f64(os, b.lat);
        binio::write_f64(os, b.lon);
        binio::write_f64(os, double(b.region_cluster));
        binio::write_f64(os, double(b.archetype));
    }
    for (const TimePoint& t : data.timestamps) {
        binio::write_f64(os, double(t.month));
        binio::write_f64(os, double(t.day));
        binio::write_f64(os, double(t.hour));
        binio::write_f64(os, double(t.quarter));
    }
    for (size_t p = 0; p < data.size(); ++p) {
        const Building& b = data.buildings[data.points[p].building];
        const TimePoint& t = data.timestamps[data.points[p].timestamp];
        binio::write_f64(os, double(b.id));
        binio::write_f64(os, double(t.month));
        binio::write_f64(os, double(t.day));
        binio::write_f64(os, double(t.hour));
        binio::write_f64(os, double(t.quarter));
        binio::write_f64_array(os, data.feature_row(p));
        binio::write_f64_array(os, data.label_row(p));
    }
}

Dataset read_dataset_body(std::istream& is) {
    binio::expect_magic(is, kDatasetMagic, "dataset file");
    const uint32_t version = binio::read_u32(is, "version");
    if (version != kDatasetVersion)
        throw Error(ErrorCode::Format,
                    "dataset file: unsupported version " + std::to_string(version));
    Dataset ds;
    const uint32_t n_b = binio::read_u32(is, "building count");
    const uint32_t n_t = binio::read_u32(is, "timestamp count");
    const uint32_t n_p = binio::read_u32(is, "point count");
    const uint32_t d_t = binio::read_u32(is, "D_t");
    const uint32_t d_s = binio::read_u32(is, "D_s");
    const uint32_t d_st = binio::read_u32(is, "D_st");
    const uint32_t d_y = binio::read_u32(is, "D_y");
    if (d_t != kTimeDim || d_s != kSpaceDim || d_st != kSpaceTimeDim || d_y != kLabelDim)
        throw Error(ErrorCode::Format, "dataset file: incompatible feature/label dimensions");

    ds.buildings.resize(n_b);
    std::map<uint32_t, uint32_t> building_index;
    for (uint32_t b = 0; b < n_b; ++b) {
        Building& bd = ds.buildings[b];
        bd.id = uint32_t(binio::read_f64(is, "building id"));
        bd.lat = binio::read_f64(is, "building lat");
        bd.lon = binio::read_f64(is, "building lon");
        bd.region_cluster = uint32_t(binio::read_f64(is, "building region"));
        bd.archetype = uint32_t(binio::read_f64(is, "building archetype"));
        building_index[bd.id] = b;
    }
    ds.timestamps.resize(n_t);
    std::map<std::array<int, 4>, uint32_t> ts_index;
    for (uint32_t t = 0; t < n_t; ++t) {
        TimePoint& tp = ds.timestamps[t];
        tp.month = int(binio::read_f64(is, "month"));
        tp.day = int(binio::read_f64(is, "day"));
        tp.hour = int(binio::read_f64(is, "hour"));
        tp.quarter = int(binio::read_f64(is, "quarter"));
        ts_index[{tp.month, tp.day, tp.hour, tp.quarter}] = t;
    }
    ds.points.resize(n_p);
    ds.features.resize(size_t(n_p) * kFeatureDim);
    ds.labels.resize(size_t(n_p) * kLabelDim);
    for (uint32_t p = 0; p < n_p; ++p) {
        const uint32_t bid = uint32_t(binio::read_f64(is, "point building id"));
        std::array<int, 4> key;
        key[0] = int(binio::read_f64(is, "point month"));
        key[1] = int(binio::read_f64(is, "point day"));
        key[2] = int(binio::read_f64(is, "point hour"));
        key[3] = int(binio::read_f64(is, "point quarter"));
        auto bit = building_index.find(bid);
        auto tit = ts_index.find(key);
        if (bit == building_index.end() || tit == ts_index.end())
            throw Error(ErrorCode::Format, "dataset file: point references unknown building/timestamp");
        ds.points[p] = {bit->second, tit->second};
        binio::read_f64_array(is, {ds.features.data() + size_t(p) * kFeatureDim, size_t(kFeatureDim)},
                              "features");
        binio::read_f64_array(is, {ds.labels.data() + size_t(p) * kLabelDim, size_t(kLabelDim)},
                              "label");
    }
    return ds;
}

} // namespace

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    write_dataset_body(os, data);
    if (!os)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::Io, "cannot open " + path);
    return read_dataset_body(is);
}

void export_csv(const Dataset& data, const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    os << "building_id,month,day,hour,quarter,lat,long,region,archetype";
    os << ",xt_month,xt_day,xt_hour,xt_quarter";
    const char* ch_names[kSpaceChannels] = {"r", "g", "b"};
    for (int c = 0; c < kSpaceChannels; ++c)
        for (int i = 0; i < kSpaceBins; ++i) os << ",xs_" << ch_names[c] << "_b" << i;
    for (int c = 0; c < kMetChannels; ++c)
        for (int j = 0; j < kMetWindow; ++j) os << ",xst_" << kMetChannelNames[c] << "_h" << j;
    for (int j = 0; j < kLabelDim; ++j) os << ",y_q" << j;
    os << "\n";

    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.10g", v);
        os << buf;
    };
    for (size_t p = 0; p < data.size(); ++p) {
        const Building& b = data.buildings[data.points[p].building];
        const TimePoint& t = data.timestamps[data.points[p].timestamp];
        os << b.id << ',' << t.month << ',' << t.day << ',' << t.hour << ',' << t.quarter;
        std::snprintf(buf, sizeof buf, ",%.10g", b.lat);
        os << buf;
        std::snprintf(buf, sizeof buf, ",%.10g", b.lon);
        os << buf;
        os << ',' << b.region_cluster << ',' << b.archetype;
        for (double v : data.feature_row(p)) put(v);
        for (double v : data.label_row(p)) put(v);
        os << "\n";
    }
    if (!os)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

namespace {

void write_index_list(std::ostream& os, const std::vector<uint32_t>& v) {
    binio::write_u64(os, v.size());
    for (uint32_t x : v) binio::write_u32(os, x);
}

std::vector<uint32_t> read_index_list(std::istream& is, const char* what) {
    const uint64_t n = binio::read_u64(is, what);
    std::vector<uint32_t> v(n);
    for (uint64_t i = 0; i < n; ++i) v[i] = binio::read_u32(is, what);
    return v;
}

void write_f64_vec(std::ostream& os, const std::vector<double>& v) {
    binio::write_u64(os, v.size());
    binio::write_f64_array(os, v);
}

std::vector<double> read_f64_vec(std::istream& is, const char* what) {
    const uint64_t n = binio::read_u64(is, what);
    std::vector<double> v(n);
    binio::read_f64_array(is, v, what);
    return v;
}

} // namespace

void save_splits(const DatasetSplits& splits, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    binio::write_magic(os, kSplitsMagic);
    binio::write_u32(os, kSplitsVersion);
    write_dataset_body(os, splits.data);
    write_index_list(os, splits.avail);
    write_index_list(os, splits.val);
    write_index_list(os, splits.spatial);
    write_index_list(os, splits.temporal);
    write_index_list(os, splits.spatio_temporal);
    binio::write_u32(os, splits.norm.fitted ? 1 : 0);
    if (splits.norm.fitted) {
        write_f64_vec(os, splits.norm.feat_mean);
        write_f64_vec(os, splits.norm.feat_scale);
        write_f64_vec(os, splits.norm.label_mean);
        write_f64_vec(os, splits.norm.label_scale);
        write_index_list(os, splits.norm.feat_passthrough);
        write_index_list(os, splits.norm.label_passthrough);
    }
    if (!os)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

DatasetSplits load_splits(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::Io, "cannot open " + path);
    binio::expect_magic(is, kSplitsMagic, "splits file");
    const uint32_t version = binio::read_u32(is, "version");
    if (version != kSplitsVersion)
        throw Error(ErrorCode::Format, "splits file: unsupported version " + std::to_string(version));
    DatasetSplits sp;
    sp.data = read_dataset_body(is);
    sp.avail = read_index_list(is, "avail");
    sp.val = read_index_list(is, "val");
    sp.spatial = read_index_list(is, "spatial");
    sp.temporal = read_index_list(is, "temporal");
    sp.spatio_temporal = read_index_list(is, "spatio_temporal");
    if (binio::read_u32(is, "norm flag") != 0) {
        sp.norm.fitted = true;
        sp.norm.feat_mean = read_f64_vec(is, "feat_mean");
        sp.norm.feat_scale = read_f64_vec(is, "feat_scale");
        sp.norm.label_mean = read_f64_vec(is, "label_mean");
        sp.norm.label_scale = read_f64_vec(is, "label_scale");
        sp.norm.feat_passthrough = read_index_list(is, "feat_passthrough");
        sp.norm.label_passthrough = read_index_list(is, "label_passthrough");
    }
    return sp;
}

} // namespace adl::data
