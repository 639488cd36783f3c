#include "v2l/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace v2l {

namespace {

std::mutex g_sink_mutex;

WarningSink& sink_storage() {
    static WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}

}  // namespace

void warn(const std::string& message) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    if (sink_storage()) sink_storage()(message);
}

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    return std::exchange(sink_storage(), std::move(sink));
}

}  // namespace v2l
