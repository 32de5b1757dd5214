// SPDX-License-Identifier: Apache-2.0
//
// HTTP binding of the engine.
#pragma once

#include "liqhedge/service/engine.hpp"

#include <httplib.h>

#include <string>

namespace liqhedge::service {

/// Registers every endpoint of `engine` on `server`. The engine must outlive the server.
inline void register_routes(httplib::Server& server, const Engine& engine) {
    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/market", [&engine, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, engine.handle("GET", "/market", ""));
    });
    for (const char* path : {"/solve", "/price", "/bounds", "/sweep", "/distribution"}) {
        const std::string p = path;
        server.Post(p, [&engine, reply, p](const httplib::Request& req, httplib::Response& res) {
            reply(res, engine.handle("POST", p, req.body));
        });
    }
}

/// Splits "host:port"; a bare port binds all interfaces.
inline std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    const std::string host = colon == std::string::npos ? "0.0.0.0" : bind.substr(0, colon);
    const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw std::invalid_argument(port);
        return {host.empty() ? "0.0.0.0" : host, p};
    } catch (const std::exception&) {
        throw ValidationError("bind: expected ADDR:PORT, got '" + bind + "'");
    }
}

}  // namespace liqhedge::service
