#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cpd {

using Index = std::size_t;

/// A T x d real-valued signal, one row per time step.
///
/// Entries are validated to be finite at construction; the data is never
/// mutated afterwards, so a Signal can be shared freely between threads.
class Signal {
public:
    explicit Signal(Eigen::MatrixXd data);

    Index n_samples() const { return static_cast<Index>(data_.rows()); }
    Index n_dims() const { return static_cast<Index>(data_.cols()); }

    const Eigen::MatrixXd& data() const { return data_; }
    double operator()(Index t, Index j) const {
        return data_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    }

private:
    Eigen::MatrixXd data_;
};

/// Strictly increasing breakpoint indexes in [1, T] whose last element is T.
///
/// Segment k covers samples t_k+1 .. t_{k+1} with t_0 = 0, i.e. the half-open
/// index range [t_k, t_{k+1}) in zero-based storage.
class Segmentation {
public:
    /// Sorts the input, appends T when missing, and validates the result.
    static Segmentation make(std::vector<Index> bkps, Index n_samples);

    const std::vector<Index>& bkps() const { return bkps_; }
    Index n_samples() const { return n_samples_; }
    Index n_changes() const { return bkps_.size() - 1; }

    /// Interior breakpoints, i.e. everything but the terminal T.
    std::span<const Index> change_points() const {
        return {bkps_.data(), bkps_.size() - 1};
    }

    /// (start, end) pairs of every segment, start exclusive in 1-based terms.
    std::vector<std::pair<Index, Index>> segments() const;

    friend bool operator==(const Segmentation&, const Segmentation&) = default;

private:
    Segmentation(std::vector<Index> bkps, Index n_samples)
        : bkps_(std::move(bkps)), n_samples_(n_samples) {}

    std::vector<Index> bkps_;
    Index n_samples_ = 0;
};

struct GeneratorSpec {
    Index n_samples = 100;
    Index n_dims = 1;
    Index n_bkps = 1;
    Index min_spacing = 1;
    double noise_std = 1.0;
    double jump_lo = 1.0;
    double jump_hi = 10.0;
    std::uint64_t seed = 0;
};

/// Validates the invariants of a GeneratorSpec; throws std::invalid_argument.
void validate(const GeneratorSpec& spec);

/// Gaussian noise around a piecewise constant mean. Consecutive levels differ
/// by a jump drawn uniformly from [jump_lo, jump_hi] with a random sign, per
/// dimension.
std::pair<Signal, Segmentation> generate_pw_constant(const GeneratorSpec& spec);

/// Zero-mean Gaussian noise whose standard deviation changes at every
/// breakpoint. The first regime has std noise_std (1 when noise_std is 0);
/// each following regime multiplies, then divides, alternately, by a factor
/// drawn from [jump_lo, jump_hi].
std::pair<Signal, Segmentation> generate_pw_scale(const GeneratorSpec& spec);

/// Draws n_bkps breakpoints uniformly among all compositions of T into
/// n_bkps + 1 parts of length >= min_spacing. Exposed for testing.
std::vector<Index> draw_breakpoints(Index n_samples, Index n_bkps, Index min_spacing,
                                    std::uint64_t seed);

Signal load_csv(const std::filesystem::path& path);
Signal parse_csv(std::istream& in);
void write_csv(std::ostream& out, const Signal& signal);

} // namespace cpd
