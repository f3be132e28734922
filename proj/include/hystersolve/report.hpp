#pragma once

#include <string_view>

namespace hyst {

enum class Status { pass, warn, fail };

constexpr std::string_view to_string(Status s) noexcept {
    switch (s) {
        case Status::pass: return "pass";
        case Status::warn: return "warn";
        case Status::fail: return "fail";
    }
    return "fail";
}

}  // namespace hyst
