#pragma once

#include <cstddef>
#include <vector>

namespace trendlab {

struct EpochRecord {
    double loss = 0.0;          // monitored proxy loss for the epoch
    double learning_rate = 0.0;
    double seconds = 0.0;       // wall time of the epoch
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    bool stopped_early = false;

    std::size_t epoch_count() const { return epochs.size(); }
    double total_seconds() const {
        double sum = 0.0;
        for (const EpochRecord& e : epochs) sum += e.seconds;
        return sum;
    }
};

} // namespace trendlab
