#include "cpd/signal.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cpd {

Signal::Signal(Eigen::MatrixXd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw std::invalid_argument("signal must have at least one sample and one dimension");
    }
    if (!data_.allFinite()) {
        throw std::invalid_argument("signal contains non-finite values");
    }
}

Segmentation Segmentation::make(std::vector<Index> bkps, Index n_samples) {
    if (n_samples < 1) {
        throw std::invalid_argument("segmentation requires T >= 1");
    }
    std::sort(bkps.begin(), bkps.end());
    if (std::adjacent_find(bkps.begin(), bkps.end()) != bkps.end()) {
        throw std::invalid_argument("duplicate breakpoint");
    }
    for (Index b : bkps) {
        if (b < 1 || b > n_samples) {
            throw std::invalid_argument("breakpoint " + std::to_string(b) +
                                        " outside [1, " + std::to_string(n_samples) + "]");
        }
    }
    if (bkps.empty() || bkps.back() != n_samples) {
        bkps.push_back(n_samples);
    }
    return Segmentation(std::move(bkps), n_samples);
}

std::vector<std::pair<Index, Index>> Segmentation::segments() const {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(bkps_.size());
    Index start = 0;
    for (Index end : bkps_) {
        out.emplace_back(start, end);
        start = end;
    }
    return out;
}

} // namespace cpd
