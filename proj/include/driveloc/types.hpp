#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace driveloc {

// The three synchronized camera positions, plus the cross-view fusion output.
enum class View { Dashboard, Rearview, RightWindow, Fused };

std::string_view to_string(View v);
std::optional<View> view_from_string(std::string_view s);

// A localized activity: a time span within one video, optionally classified.
struct ActivityInterval {
    std::string video_id;
    View view = View::Dashboard;
    double start_s = 0.0;
    double end_s = 0.0;
    double stat_value = 0.0;
    std::optional<double> p_value;
    std::optional<int> class_id;  // 1..16 once classified
    std::string label;            // class name when classified
    std::string error;            // transport/classifier failure note, if any

    double length_s() const { return end_s - start_s; }
};

}  // namespace driveloc
