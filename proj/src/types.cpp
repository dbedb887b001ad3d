#include "cascade/types.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cascade {

LabelSpace::LabelSpace(std::vector<std::string> class_names, int normal_id)
    : names_(std::move(class_names)), normal_id_(normal_id) {
    if (names_.empty()) {
        throw std::invalid_argument("LabelSpace: class list is empty");
    }
    if (normal_id_ < 0 || normal_id_ >= size()) {
        throw std::invalid_argument("LabelSpace: normal_id out of range");
    }
    if (size() < 2) {
        throw std::invalid_argument("LabelSpace: need at least one attack class");
    }
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) {
        throw std::invalid_argument("LabelSpace: duplicate class name");
    }
    for (int id = 0; id < size(); ++id) {
        if (id != normal_id_) attack_ids_.push_back(id);
    }
}

int LabelSpace::id_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

const char* layer_name(Layer layer) {
    switch (layer) {
        case Layer::Edge: return "edge";
        case Layer::Fog: return "fog";
        case Layer::Cloud: return "cloud";
    }
    return "?";
}

bool is_admissible_path(const std::vector<int>& path) {
    static const std::vector<std::vector<int>> admissible = {
        {1, 3}, {1, 2, 3}, {1, 2, 4}, {1, 2, 4, 3}};
    return std::find(admissible.begin(), admissible.end(), path) != admissible.end();
}

MetricValue defined_metric(double percent) { return MetricValue{percent, {}}; }

MetricValue absent_metric(std::string reason) { return MetricValue{std::nullopt, std::move(reason)}; }

}  // namespace cascade
