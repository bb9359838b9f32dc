/*
 * Copyright 2026 The mirrorball Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mirrorball/service.hpp"

#include "mirrorball/image_io.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <iostream>
#include <thread>

namespace mirrorball::service {

using nlohmann::json;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

HttpReply json_reply(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpReply error_reply(int status, const std::string& message) { return json_reply(status, {{"error", message}}); }

std::string query_param(const std::string& target, const std::string& key)
{
    const auto q = target.find('?');
    if (q == std::string::npos)
    {
        return {};
    }
    std::size_t pos = q + 1;
    while (pos <= target.size())
    {
        const auto amp = std::min(target.find('&', pos), target.size());
        const std::string item = target.substr(pos, amp - pos);
        const auto eq = item.find('=');
        if (url_decode(item.substr(0, eq)) == key)
        {
            return eq == std::string::npos ? std::string() : url_decode(item.substr(eq + 1));
        }
        pos = amp + 1;
    }
    return {};
}

HttpReply handle_register(ServiceState& state, const std::string& body)
{
    const json request = json::parse(body);
    const auto rig = state.rig();
    const json& list = request.is_object() ? request.value("correspondences", json::array()) : request;
    const auto pairs = io::correspondences_from_json(list);

    std::string id_a = rig->reference_id();
    std::string id_b;
    if (request.is_object() && request.contains("source_a"))
    {
        id_a = request.at("source_a").get<std::string>();
    }
    if (request.is_object() && request.contains("source_b"))
    {
        id_b = request.at("source_b").get<std::string>();
    }
    else
    {
        for (const auto& s : rig->sources())
        {
            if (s.id != id_a)
            {
                id_b = s.id;
                break;
            }
        }
    }
    const RigSource* a = rig->find(id_a);
    const RigSource* b = rig->find(id_b);
    if (!a || !b)
    {
        throw UnknownSourceError("unknown source id '" + (a ? id_b : id_a) + "'");
    }

    const RayPairs rays = rays_from_correspondences(io::to_disk(pairs, a->circle, b->circle), a->fov, b->fov);
    const RotationEstimate est = estimate_rotation(rays.rays_a, rays.rays_b);
    // Rig rotation for b: b frame -> a frame -> reference frame.
    const Rotation3 b_to_reference = a->rotation * est.rotation.transpose();
    return json_reply(200, {{"source_a", id_a},
                            {"source_b", id_b},
                            {"rotation", est.rotation.row_major()},
                            {"source_rotation", b_to_reference.row_major()},
                            {"residual_deg", est.residual_deg}});
}

HttpReply dispatch(ServiceState& state, const std::string& method, const std::string& target, const std::string& body)
{
    const std::string path = target.substr(0, target.find('?'));
    if (path == "/api/rig")
    {
        if (method == "GET")
        {
            return json_reply(200, io::rig_to_json(*state.rig()));
        }
        if (method == "PUT")
        {
            Rig rig = io::rig_from_json(json::parse(body));
            state.replace_rig(std::move(rig));
            return json_reply(200, io::rig_to_json(*state.rig()));
        }
        return error_reply(405, "use GET or PUT on /api/rig");
    }
    if (path == "/api/register")
    {
        if (method != "POST")
        {
            return error_reply(405, "use POST on /api/register");
        }
        return handle_register(state, body);
    }
    if (path == "/api/frame")
    {
        if (method != "GET")
        {
            return error_reply(405, "use GET on /api/frame");
        }
        const std::string view_text = query_param(target, "view");
        const ViewState view = view_text.empty() ? ViewState{} : view_state_from_json(json::parse(view_text));
        const auto rig = state.rig();
        const auto png = render_png(*rig, state.current_views(), view);
        return {200, "image/png", std::string(png.begin(), png.end())};
    }
    return error_reply(404, "no endpoint " + path);
}

class WsSession : public std::enable_shared_from_this<WsSession>
{
public:
    WsSession(tcp::socket&& socket, std::shared_ptr<ServiceState> state, net::thread_pool& pool)
        : ws_(std::move(socket)), state_(std::move(state)), pool_(pool)
    {
    }

    void run(http::request<http::string_body> req)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec)
    {
        if (!ec)
        {
            do_read();
        }
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec)
        {
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        ++received_;
        try
        {
            pending_.emplace(received_, view_state_from_json(json::parse(text)));
            maybe_render();
        }
        catch (const std::exception& e)
        {
            const std::string msg = json{{"error", e.what()}, {"seq", received_}}.dump();
            enqueue({false, std::vector<std::uint8_t>(msg.begin(), msg.end())});
        }
        do_read();
    }

    // Latest wins: only the newest pending ViewState is ever rendered.
    void maybe_render()
    {
        if (rendering_ || !pending_)
        {
            return;
        }
        rendering_ = true;
        auto job = std::move(*pending_);
        pending_.reset();
        net::post(pool_, [self = shared_from_this(), job = std::move(job)] {
            StreamReply reply = render_stream_message(*self->state_, job.first, job.second);
            net::post(self->ws_.get_executor(), [self, reply = std::move(reply)]() mutable {
                self->enqueue(std::move(reply));
                self->rendering_ = false;
                self->maybe_render();
            });
        });
    }

    void enqueue(StreamReply reply)
    {
        outbox_.push_back(std::move(reply));
        if (!writing_)
        {
            do_write();
        }
    }

    void do_write()
    {
        writing_ = true;
        ws_.binary(outbox_.front().binary);
        ws_.async_write(net::buffer(outbox_.front().payload), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t)
    {
        outbox_.pop_front();
        if (ec)
        {
            writing_ = false;
            return;
        }
        if (outbox_.empty())
        {
            writing_ = false;
            return;
        }
        do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::shared_ptr<ServiceState> state_;
    net::thread_pool& pool_;
    std::uint32_t received_ = 0;
    std::optional<std::pair<std::uint32_t, ViewState>> pending_;
    bool rendering_ = false;
    std::deque<StreamReply> outbox_;
    bool writing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession>
{
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<ServiceState> state, net::thread_pool& pool)
        : stream_(std::move(socket)), state_(std::move(state)), pool_(pool)
    {
    }

    void run() { net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this())); }

private:
    void do_read()
    {
        parser_.emplace();
        parser_->body_limit(16 * 1024 * 1024);
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec)
        {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        http::request<http::string_body> req = parser_->release();
        const std::string target(req.target());
        if (websocket::is_upgrade(req))
        {
            if (target.substr(0, target.find('?')) == "/api/stream")
            {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), state_, pool_)->run(std::move(req));
                return;
            }
            send(req, error_reply(404, "websocket endpoint is /api/stream"));
            return;
        }
        send(req, handle_http(*state_, std::string(req.method_string()), target, req.body()));
    }

    void send(const http::request<http::string_body>& req, HttpReply reply)
    {
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(reply.status), req.version());
        res->set(http::field::server, "mirrorball");
        res->set(http::field::content_type, reply.content_type);
        res->keep_alive(req.keep_alive());
        res->body() = std::move(reply.body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || res->need_eof())
            {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
    std::shared_ptr<ServiceState> state_;
    net::thread_pool& pool_;
};

class Listener : public std::enable_shared_from_this<Listener>
{
public:
    Listener(net::io_context& ioc, tcp::endpoint endpoint, std::shared_ptr<ServiceState> state, net::thread_pool& pool)
        : ioc_(ioc), acceptor_(net::make_strand(ioc)), state_(std::move(state)), pool_(pool)
    {
        acceptor_.open(endpoint.protocol());
        acceptor_.set_option(net::socket_base::reuse_address(true));
        acceptor_.bind(endpoint);
        acceptor_.listen(net::socket_base::max_listen_connections);
    }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void run() { do_accept(); }

    void close()
    {
        net::post(acceptor_.get_executor(), [self = shared_from_this()] {
            beast::error_code ignored;
            self->acceptor_.close(ignored);
        });
    }

private:
    void do_accept()
    {
        acceptor_.async_accept(net::make_strand(ioc_), beast::bind_front_handler(&Listener::on_accept, shared_from_this()));
    }

    void on_accept(beast::error_code ec, tcp::socket socket)
    {
        if (ec == net::error::operation_aborted)
        {
            return;
        }
        if (!ec)
        {
            std::make_shared<HttpSession>(std::move(socket), state_, pool_)->run();
        }
        do_accept();
    }

    net::io_context& ioc_;
    tcp::acceptor acceptor_;
    std::shared_ptr<ServiceState> state_;
    net::thread_pool& pool_;
};

} // namespace

std::string url_decode(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (s[i] == '+')
        {
            out.push_back(' ');
        }
        else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
                 std::isxdigit(static_cast<unsigned char>(s[i + 2])))
        {
            out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        }
        else
        {
            out.push_back(s[i]);
        }
    }
    return out;
}

ServiceState::ServiceState(io::ProjectConfig config)
    : config_(std::move(config)), rig_(std::make_shared<const Rig>(config_.rig)), started_(std::chrono::steady_clock::now())
{
}

std::shared_ptr<const Rig> ServiceState::rig() const
{
    std::lock_guard lock(mutex_);
    return rig_;
}

void ServiceState::replace_rig(Rig rig)
{
    for (const auto& s : rig.sources())
    {
        if (!config_.inputs.count(s.id))
        {
            throw UnknownSourceError("rig source '" + s.id + "' has no configured input");
        }
    }
    auto next = std::make_shared<const Rig>(std::move(rig));
    std::lock_guard lock(mutex_);
    rig_ = std::move(next);
}

std::vector<BallView> ServiceState::current_views() const
{
    std::size_t index = 0;
    if (config_.service.fps > 0.0)
    {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        index = static_cast<std::size_t>(elapsed * config_.service.fps) % std::max<std::size_t>(1, io::common_frame_count(config_));
    }
    {
        std::lock_guard lock(mutex_);
        if (cached_views_ && cached_index_ == index)
        {
            return *cached_views_;
        }
    }
    auto views = std::make_shared<const std::vector<BallView>>(io::load_views(config_, index));
    std::lock_guard lock(mutex_);
    cached_index_ = index;
    cached_views_ = views;
    return *views;
}

HttpReply handle_http(ServiceState& state, const std::string& method, const std::string& target, const std::string& body)
{
    try
    {
        return dispatch(state, method, target, body);
    }
    catch (const UnknownSourceError& e)
    {
        return error_reply(404, e.what());
    }
    catch (const ValidationError& e)
    {
        return error_reply(400, e.what());
    }
    catch (const json::exception& e)
    {
        return error_reply(400, std::string("invalid JSON: ") + e.what());
    }
    catch (const IoError& e)
    {
        return error_reply(500, e.what());
    }
}

StreamReply render_stream_message(ServiceState& state, std::uint32_t seq, const ViewState& view)
{
    try
    {
        const auto rig = state.rig();
        return {true, encode_stream_frame(seq, render_view(*rig, state.current_views(), view))};
    }
    catch (const std::exception& e)
    {
        const int status = dynamic_cast<const UnknownSourceError*>(&e) ? 404 : 400;
        const std::string msg = json{{"error", e.what()}, {"status", status}, {"seq", seq}}.dump();
        return {false, std::vector<std::uint8_t>(msg.begin(), msg.end())};
    }
}

struct StreamService::Impl
{
    net::io_context ioc;
    net::thread_pool render_pool{1};
    std::shared_ptr<Listener> listener;
    std::vector<std::thread> threads;
    bool running = false;
};

StreamService::StreamService(io::ProjectConfig config)
    : state_(std::make_shared<ServiceState>(std::move(config))), impl_(std::make_unique<Impl>())
{
}

StreamService::~StreamService() { stop(); }

unsigned short StreamService::start(const std::string& bind, unsigned short port, int io_threads)
{
    if (impl_->running)
    {
        throw ValidationError("service already running");
    }
    beast::error_code ec;
    const auto address = net::ip::make_address(bind, ec);
    if (ec)
    {
        throw ValidationError("invalid bind address '" + bind + "'");
    }
    try
    {
        impl_->listener = std::make_shared<Listener>(impl_->ioc, tcp::endpoint(address, port), state_, impl_->render_pool);
    }
    catch (const boost::system::system_error& e)
    {
        throw IoError("cannot listen on " + bind + ":" + std::to_string(port) + ": " + e.what());
    }
    impl_->listener->run();
    impl_->running = true;
    for (int i = 0; i < std::max(1, io_threads); ++i)
    {
        impl_->threads.emplace_back([this] { impl_->ioc.run(); });
    }
    return impl_->listener->port();
}

void StreamService::stop()
{
    if (!impl_ || !impl_->running)
    {
        return;
    }
    impl_->listener->close();
    impl_->ioc.stop();
    for (auto& t : impl_->threads)
    {
        t.join();
    }
    impl_->threads.clear();
    impl_->render_pool.join();
    impl_->running = false;
}

void StreamService::wait_for_signal()
{
    net::io_context signals_ioc;
    net::signal_set signals(signals_ioc, SIGINT, SIGTERM);
    signals.async_wait([](beast::error_code, int) {});
    signals_ioc.run();
}

} // namespace mirrorball::service
