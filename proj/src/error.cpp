#include "rabi/error.hpp"

#include <iostream>
#include <mutex>

namespace rabi {

namespace {

std::mutex& handler_mutex()
{
    static std::mutex m;
    return m;
}

WarningHandler& handler()
{
    static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return h;
}

} // namespace

void warn(const std::string& message)
{
    std::lock_guard<std::mutex> lock(handler_mutex());
    if (handler())
        handler()(message);
}

WarningHandler set_warning_handler(WarningHandler h)
{
    std::lock_guard<std::mutex> lock(handler_mutex());
    WarningHandler old = std::move(handler());
    handler() = std::move(h);
    return old;
}

} // namespace rabi
