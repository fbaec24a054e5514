#pragma once

#include "cvilab/matrix.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvilab {

inline constexpr int kSlotsPerDay = 96;
inline constexpr int kMinutesPerSlot = 15;

struct Sample {
    std::int64_t minute = 0;  // wall-clock minutes since 1970-01-01T00:00
    double kw = 0.0;
};

struct ReadingSeries {
    std::string household_id;
    std::vector<Sample> samples;  // strictly increasing by minute
};

struct DailyProfile {
    std::string household_id;
    std::vector<double> values;
};

// N households x d slots of normalized profiles. Immutable once built.
class ProfileMatrix {
public:
    ProfileMatrix() = default;
    ProfileMatrix(std::vector<std::string> ids, Matrix values);

    static ProfileMatrix from_profiles(const std::vector<DailyProfile>& rows);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const Matrix& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.rows(); }
    Eigen::Index dimension() const noexcept { return values_.cols(); }

    bool operator==(const ProfileMatrix&) const = default;

private:
    std::vector<std::string> ids_;
    Matrix values_;
};

// Parses "YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|+HH[:MM]|-HH[:MM]]". The zone
// suffix is accepted but ignored: slots are assigned by local wall clock.
// Returns minutes since 1970-01-01; throws InvalidArgument.
std::int64_t parse_timestamp(std::string_view text);

// CSV with header `household_id,timestamp,kw`. Series come out in order of
// first appearance, each sorted by time.
std::vector<ReadingSeries> parse_readings(std::istream& csv);

// Per-slot median over all days; even counts average the two middle values.
std::vector<double> median_daily_profile(const ReadingSeries& series);

std::vector<double> l2_normalize(std::span<const double> profile);

// median_daily_profile followed by l2_normalize for each series.
ProfileMatrix build_profile_matrix(const std::vector<ReadingSeries>& series);

// Output format: header `household_id,t0000,t0015,...,t2345`, 9 significant digits.
void write_profiles_csv(std::ostream& out, const ProfileMatrix& profiles);
ProfileMatrix read_profiles_csv(std::istream& in);

std::string slot_label(int slot);

enum class OutlierPlacement { far, near };

struct SynthCluster {
    int size = 0;
    std::vector<double> profile_template;  // kW per slot
    double spread = 0.0;                    // per-slot Gaussian std, kW
};

struct SynthSpec {
    std::vector<SynthCluster> clusters;
    int outlier_count = 0;
    OutlierPlacement placement = OutlierPlacement::far;
    std::uint64_t seed = 0;
};

struct SynthData {
    ProfileMatrix profiles;
    Labels truth;  // cluster index; outlier i is labelled clusters.size() + i
};

// Smooth household-like daily shapes (base load plus morning/evening peaks).
std::vector<std::vector<double>> make_templates(int count, std::uint64_t seed);

SynthSpec uniform_synth_spec(int cluster_count, int cluster_size, double spread,
                             int outlier_count, std::uint64_t seed);

SynthData generate_synthetic(const SynthSpec& spec);

}  // namespace cvilab
