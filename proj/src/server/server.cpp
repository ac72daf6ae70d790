#include "livediag/server/server.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "livediag/edit/edit.hpp"
#include "livediag/render/render.hpp"
#include "livediag/server/protocol.hpp"

namespace livediag::server {

namespace {

constexpr std::size_t kMaxJsonDepth = 256;

struct Job {
    std::string uri;
    std::uint64_t generation = 0;
    SourceDocument document;
    std::optional<edit::InteractionParams> params;
    std::uint64_t interaction = 0;
    std::shared_ptr<std::atomic<std::uint64_t>> inFlight;  // the document's counter
};

struct PendingStart {
    ClientId client = 0;
    Json id;
    bool respond = true;
    std::string elementId;
    edit::InteractionKind kind = edit::InteractionKind::MoveElement;
    std::optional<edit::AnchorEnd> anchor;
};

struct DocumentState {
    std::uint64_t generation = 0;
    SourceDocument document;
    std::set<ClientId> subscribers;

    // last execution of any version, and the one shown to clients
    std::shared_ptr<const PipelineResult> latest;
    SourceDocument latestDocument;
    std::shared_ptr<const PipelineResult> displayed;
    std::int64_t displayedVersion = 0;
    std::uint64_t seq = 0;

    bool running = false;
    std::optional<Job> queued;
    std::shared_ptr<std::atomic<std::uint64_t>> inFlight = std::make_shared<std::atomic<std::uint64_t>>(0);

    std::unique_ptr<edit::InteractionSession> interaction;
    std::uint64_t interactionId = 0;
    ClientId interactionOwner = 0;
    bool interactionAbortedStale = false;
    std::vector<PendingStart> pendingStarts;

    bool idle() const { return !running && !queued && !interaction; }
};

std::string dump(const Json& json) {
    return json.dump(-1, ' ', false, Json::error_handler_t::replace);
}

struct TooDeep {};

}  // namespace

struct Server::Impl {
    ServerOptions options;

    std::mutex mutex;
    std::condition_variable taskCv;
    std::condition_variable jobCv;
    std::condition_variable idleCv;
    std::deque<std::function<void()>> tasks;
    std::deque<Job> jobs;
    std::size_t outstanding = 0;  // queued or running tasks and jobs
    bool stopping = false;
    std::thread coordinator;
    std::vector<std::thread> workers;

    std::atomic<ClientId> nextClient{1};
    std::atomic<std::uint64_t> executionsStarted{0};
    std::atomic<std::uint64_t> executionsCompleted{0};
    std::atomic<std::uint64_t> maxInFlight{0};
    std::atomic<std::uint64_t> violations{0};

    // coordinator state
    std::map<ClientId, SendFn> clients;
    std::map<std::string, DocumentState> documents;
    std::uint64_t nextGeneration = 1;
    std::uint64_t nextInteraction = 1;

    explicit Impl(ServerOptions opts) : options(std::move(opts)) {
        std::size_t n = options.workers;
        if (n == 0) {
            n = std::max(1u, std::thread::hardware_concurrency());
        }
        coordinator = std::thread([this] { coordinatorLoop(); });
        for (std::size_t i = 0; i < n; ++i) {
            workers.emplace_back([this] { workerLoop(); });
        }
    }

    ~Impl() {
        {
            std::lock_guard lock(mutex);
            stopping = true;
        }
        taskCv.notify_all();
        jobCv.notify_all();
        for (auto& w : workers) {
            w.join();
        }
        coordinator.join();
    }

    // -- threads ------------------------------------------------------------------

    void post(std::function<void()> task) {
        {
            std::lock_guard lock(mutex);
            if (stopping) {
                return;
            }
            tasks.push_back(std::move(task));
            ++outstanding;
        }
        taskCv.notify_one();
    }

    void finishOne() {
        std::lock_guard lock(mutex);
        if (--outstanding == 0) {
            idleCv.notify_all();
        }
    }

    void coordinatorLoop() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(mutex);
                taskCv.wait(lock, [&] { return stopping || !tasks.empty(); });
                if (tasks.empty()) {
                    return;
                }
                task = std::move(tasks.front());
                tasks.pop_front();
            }
            task();
            finishOne();
        }
    }

    void workerLoop() {
        for (;;) {
            Job job;
            {
                std::unique_lock lock(mutex);
                jobCv.wait(lock, [&] { return stopping || !jobs.empty(); });
                if (stopping) {
                    return;
                }
                job = std::move(jobs.front());
                jobs.pop_front();
            }
            execute(std::move(job));
            finishOne();
        }
    }

    void execute(Job job) {
        auto counter = job.inFlight;
        std::uint64_t now = ++*counter;
        std::uint64_t seen = maxInFlight.load();
        while (now > seen && !maxInFlight.compare_exchange_weak(seen, now)) {
        }
        if (now > 1) {
            ++violations;
        }
        if (options.beforeExecution) {
            options.beforeExecution(job.uri, job.document.version);
        }
        auto result = std::make_shared<PipelineResult>();
        try {
            *result = runPipeline(job.document.text, options.pipeline);
        } catch (const std::exception& e) {
            result->diagnostics.push_back(
                Diagnostic{Severity::Error, Span{}, "InternalError", std::string("execution failed: ") + e.what()});
        }
        --*counter;
        ++executionsCompleted;
        post([this, job = std::move(job), result = std::shared_ptr<const PipelineResult>(result)]() mutable {
            onExecuted(std::move(job), std::move(result));
        });
    }

    void submit(DocumentState& doc, Job job) {
        doc.running = true;
        ++executionsStarted;
        job.inFlight = doc.inFlight;
        {
            std::lock_guard lock(mutex);
            jobs.push_back(std::move(job));
            ++outstanding;
        }
        jobCv.notify_one();
    }

    // -- messaging ----------------------------------------------------------------

    void send(ClientId client, const Json& message) {
        auto it = clients.find(client);
        if (it == clients.end()) {
            return;
        }
        try {
            it->second(dump(message));
        } catch (...) {
            // a failing transport only loses its own client
        }
    }

    void broadcast(const DocumentState& doc, const Json& message) {
        if (doc.subscribers.empty()) {
            return;
        }
        std::string text = dump(message);
        for (ClientId c : doc.subscribers) {
            auto it = clients.find(c);
            if (it == clients.end()) {
                continue;
            }
            try {
                it->second(text);
            } catch (...) {
            }
        }
    }

    Json updateMessage(const std::string& uri, const DocumentState& doc) const {
        bool stale = doc.latest && doc.latest != doc.displayed;
        return makeNotification("diagram/update", {{"uri", uri},
                                                   {"seq", doc.seq},
                                                   {"version", doc.displayedVersion},
                                                   {"stale", stale},
                                                   {"renderModel", render::toRenderModel(doc.displayed->layouted)}});
    }

    Json diagnosticsMessage(const std::string& uri, const DocumentState& doc) const {
        return makeNotification("diagram/diagnostics", {{"uri", uri},
                                                        {"version", doc.latestDocument.version},
                                                        {"items", toJson(doc.latest->diagnostics)}});
    }

    // -- scheduling -----------------------------------------------------------------

    void schedule(DocumentState& doc, Job job) {
        job.generation = doc.generation;
        if (doc.running) {
            doc.queued = std::move(job);  // latest wins
        } else {
            submit(doc, std::move(job));
        }
    }

    Job jobFor(const std::string& uri, const DocumentState& doc) const {
        Job job;
        job.uri = uri;
        job.document = doc.document;
        return job;
    }

    void onExecuted(Job job, std::shared_ptr<const PipelineResult> result) {
        auto it = documents.find(job.uri);
        if (it == documents.end() || it->second.generation != job.generation) {
            return;  // closed or reopened meanwhile
        }
        DocumentState& doc = it->second;
        const std::string& uri = it->first;
        doc.running = false;

        bool ownRender = job.params && doc.interaction && job.interaction == doc.interactionId;
        doc.latest = result;
        doc.latestDocument = job.document;
        // stale-but-visible: a render with errors keeps the last good diagram,
        // except while an interaction drives the renders
        if (!hasErrors(result->diagnostics) || !doc.displayed || ownRender) {
            doc.displayed = result;
            doc.displayedVersion = job.document.version;
        }
        ++doc.seq;
        broadcast(doc, updateMessage(uri, doc));
        broadcast(doc, diagnosticsMessage(uri, doc));

        if (ownRender) {
            auto outcome = doc.interaction->onFullRenderComplete(*job.params, result);
            if (outcome.catchUp) {
                broadcast(doc, makeNotification("diagram/incremental",
                                                {{"uri", uri}, {"basedOnSeq", doc.seq}, {"delta", toJson(*outcome.catchUp)}}));
            }
            if (outcome.execute) {
                Job next = jobFor(uri, doc);
                next.document = outcome.execute->document;
                next.params = outcome.execute->params;
                next.interaction = doc.interactionId;
                schedule(doc, std::move(next));
            }
            if (outcome.finished) {
                doc.interaction.reset();
            }
        }
        if (!doc.running && doc.queued) {
            Job next = std::move(*doc.queued);
            doc.queued.reset();
            submit(doc, std::move(next));
        }
        startPending(uri, doc);
    }

    // -- dispatch -------------------------------------------------------------------

    void handle(ClientId client, const std::string& text) {
        Json message;
        try {
            message = Json::parse(text, [](int depth, Json::parse_event_t, Json&) {
                if (depth > static_cast<int>(kMaxJsonDepth)) {
                    throw TooDeep{};
                }
                return true;
            });
        } catch (const Json::parse_error& e) {
            send(client, makeError(nullptr, "ParseError", std::string("malformed JSON: ") + e.what()));
            return;
        } catch (const TooDeep&) {
            send(client, makeError(nullptr, "ParseError", "JSON nesting exceeds " + std::to_string(kMaxJsonDepth)));
            return;
        }
        if (!message.is_object()) {
            send(client, makeError(nullptr, "InvalidRequest", "a message must be a JSON object"));
            return;
        }
        bool isRequest = message.contains("id");
        Json id;
        if (isRequest) {
            const Json& raw = message["id"];
            if (!raw.is_null() && !raw.is_string() && !raw.is_number_integer()) {
                send(client, makeError(nullptr, "InvalidRequest", "'id' must be a string, an integer or null"));
                return;
            }
            id = raw;
        }
        auto method = message.find("method");
        if (method == message.end() || !method->is_string()) {
            if (isRequest) {
                send(client, makeError(id, "InvalidRequest", "'method' must be a string"));
            }
            return;
        }
        static const Json kNoParams = Json::object();
        const Json* params = &kNoParams;
        if (auto p = message.find("params"); p != message.end() && !p->is_null()) {
            params = &*p;
        }
        try {
            if (!params->is_object()) {
                throw ProtocolError("InvalidParams", "'params' must be an object");
            }
            std::optional<Json> result = dispatch(client, method->get<std::string>(), *params, id, isRequest);
            if (result && isRequest) {
                send(client, makeResponse(id, std::move(*result)));
            }
        } catch (const ProtocolError& e) {
            if (isRequest) {
                send(client, makeError(id, e.code(), e.what(), e.data()));
            }
        } catch (const edit::EditError& e) {
            if (isRequest) {
                send(client, makeError(id, e.code(), e.what(), editErrorData(e)));
            }
        } catch (const std::exception& e) {
            if (isRequest) {
                send(client, makeError(id, "InternalError", e.what()));
            }
        }
    }

    static Json editErrorData(const edit::EditError& e) {
        if (!e.span()) {
            return nullptr;
        }
        return {{"span", toJson(*e.span())}};
    }

    // Returns nothing when the answer is sent later.
    std::optional<Json> dispatch(ClientId client, const std::string& method, const Json& params, const Json& id,
                                 bool isRequest) {
        if (method == "document/open") return openDocument(client, params);
        if (method == "document/change") return changeDocument(params);
        if (method == "document/subscribe") return subscribe(client, params);
        if (method == "document/close") return closeDocument(params);
        if (method == "interaction/start") return startInteraction(client, params, id, isRequest);
        if (method == "interaction/update") return updateInteraction(params);
        if (method == "interaction/end") return endInteraction(params);
        if (method == "source/reveal") return reveal(params);
        if (method == "diagram/export") return exportDiagram(params);
        throw ProtocolError("MethodNotFound", "unknown method '" + method + "'");
    }

    DocumentState& requireDocument(const std::string& uri) {
        auto it = documents.find(uri);
        if (it == documents.end()) {
            throw ProtocolError("UnknownDocument", "no open document '" + uri + "'", {{"uri", uri}});
        }
        return it->second;
    }

    // -- documents ------------------------------------------------------------------

    // A change made outside the running interaction cancels it; the next
    // interaction message learns about it through SessionStale.
    void abortInteraction(DocumentState& doc) {
        if (doc.interaction) {
            doc.interactionAbortedStale = !doc.interaction->ended();
            doc.interaction.reset();
        }
    }

    Json openDocument(ClientId client, const Json& params) {
        std::string uri = requireString(params, "uri");
        std::string text = requireString(params, "text");
        std::int64_t version = params.contains("version") ? requireInteger(params, "version") : 0;
        auto [it, created] = documents.try_emplace(uri);
        DocumentState& doc = it->second;
        if (created) {
            doc.generation = nextGeneration++;
            doc.document = SourceDocument{uri, std::move(text), version};
        } else {
            abortInteraction(doc);
            doc.document = SourceDocument{uri, std::move(text), std::max(version, doc.document.version + 1)};
        }
        doc.subscribers.insert(client);
        schedule(doc, jobFor(uri, doc));
        return Json{{"uri", uri}, {"version", doc.document.version}};
    }

    Json changeDocument(const Json& params) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        std::int64_t version = requireInteger(params, "version");
        auto edits = textEditsFromJson(requireField(params, "edits"));
        if (version != doc.document.version + 1) {
            throw ProtocolError("VersionMismatch",
                                "expected version " + std::to_string(doc.document.version + 1) + ", got " +
                                    std::to_string(version),
                                {{"expected", doc.document.version + 1}, {"current", doc.document.version}});
        }
        SourceDocument next;
        try {
            next = applyEdits(doc.document, edits);
        } catch (const EditConflict& e) {
            throw ProtocolError("InvalidParams", e.what());
        }
        abortInteraction(doc);
        doc.document = std::move(next);
        schedule(doc, jobFor(uri, doc));
        return Json{{"uri", uri}, {"version", doc.document.version}};
    }

    Json subscribe(ClientId client, const Json& params) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        bool added = doc.subscribers.insert(client).second;
        if (added && doc.displayed) {
            send(client, updateMessage(uri, doc));
            send(client, diagnosticsMessage(uri, doc));
        }
        return Json{{"uri", uri}, {"version", doc.document.version}, {"seq", doc.seq}};
    }

    Json closeDocument(const Json& params) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        auto pending = std::move(doc.pendingStarts);
        documents.erase(uri);
        for (const auto& p : pending) {
            if (p.respond) {
                send(p.client, makeError(p.id, "UnknownDocument", "the document was closed"));
            }
        }
        return Json{{"uri", uri}};
    }

    // -- interactions ---------------------------------------------------------------

    std::optional<Json> startInteraction(ClientId client, const Json& params, const Json& id, bool isRequest) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        PendingStart start;
        start.client = client;
        start.id = id;
        start.respond = isRequest;
        start.elementId = requireString(params, "elementId");
        std::string kindName = requireString(params, "kind");
        auto kind = edit::interactionKindFromString(kindName);
        if (!kind) {
            throw ProtocolError("InvalidParams", "unknown interaction kind '" + kindName + "'");
        }
        start.kind = *kind;
        if (auto anchor = optionalString(params, "anchor")) {
            if (*anchor != "start" && *anchor != "end") {
                throw ProtocolError("InvalidParams", "'anchor' must be \"start\" or \"end\"");
            }
            start.anchor = *anchor == "start" ? edit::AnchorEnd::Start : edit::AnchorEnd::End;
        } else if (start.kind == edit::InteractionKind::MoveConnectionAnchor) {
            throw ProtocolError("InvalidParams", "moveConnectionAnchor needs 'anchor'");
        }
        if (doc.interaction && !doc.interaction->ended()) {
            throw ProtocolError("InteractionActive", "another interaction is running on this document");
        }
        if (!doc.idle()) {
            // wait for the render of the current text
            doc.pendingStarts.push_back(std::move(start));
            return std::nullopt;
        }
        return beginInteraction(uri, doc, start);
    }

    Json beginInteraction(const std::string& uri, DocumentState& doc, const PendingStart& start) {
        if (!doc.latest || !(doc.latestDocument == doc.document)) {
            throw ProtocolError("NoRender", "the document has not been executed yet");
        }
        if (hasErrors(doc.latest->diagnostics)) {
            throw ProtocolError("NotEditable", "the document has errors; graphical editing needs a clean run");
        }
        auto session = std::make_unique<edit::InteractionSession>(
            edit::InteractionSession::begin(doc.document, doc.latest, start.elementId, start.kind, start.anchor));
        doc.interaction = std::move(session);
        doc.interactionId = nextInteraction++;
        doc.interactionOwner = start.client;
        doc.interactionAbortedStale = false;
        const auto& plan = doc.interaction->plan();
        return Json{{"uri", uri},
                    {"kind", edit::toString(plan.kind)},
                    {"targetElementId", plan.targetElementId},
                    {"basedOnSeq", doc.seq},
                    {"version", doc.document.version}};
    }

    void startPending(const std::string& uri, DocumentState& doc) {
        while (!doc.pendingStarts.empty() && doc.idle()) {
            PendingStart start = std::move(doc.pendingStarts.front());
            doc.pendingStarts.erase(doc.pendingStarts.begin());
            try {
                Json result = beginInteraction(uri, doc, start);
                if (start.respond) {
                    send(start.client, makeResponse(start.id, std::move(result)));
                }
            } catch (const ProtocolError& e) {
                if (start.respond) {
                    send(start.client, makeError(start.id, e.code(), e.what(), e.data()));
                }
            } catch (const edit::EditError& e) {
                if (start.respond) {
                    send(start.client, makeError(start.id, e.code(), e.what(), editErrorData(e)));
                }
            }
        }
        if (doc.interaction && !doc.interaction->ended()) {
            for (const auto& p : doc.pendingStarts) {
                if (p.respond) {
                    send(p.client,
                         makeError(p.id, "InteractionActive", "another interaction is running on this document"));
                }
            }
            doc.pendingStarts.clear();
        }
    }

    edit::InteractionSession& activeInteraction(DocumentState& doc) {
        if (!doc.interaction || doc.interaction->ended()) {
            if (doc.interactionAbortedStale) {
                doc.interactionAbortedStale = false;
                throw ProtocolError("SessionStale", "the document was changed during the interaction; it was aborted");
            }
            throw ProtocolError("NoActiveInteraction", "no interaction is running on this document");
        }
        return *doc.interaction;
    }

    Json updateInteraction(const Json& params) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        auto& session = activeInteraction(doc);
        auto values = interactionParamsFromJson(requireField(params, "params"), session.plan().kind);
        auto outcome = session.update(doc.document, values);
        if (!outcome.edits.empty()) {
            doc.document = outcome.document;
            broadcast(doc, makeNotification("document/edit", {{"uri", uri},
                                                              {"version", doc.document.version},
                                                              {"edits", toJson(outcome.edits)},
                                                              {"final", false}}));
        }
        broadcast(doc, makeNotification("diagram/incremental",
                                        {{"uri", uri}, {"basedOnSeq", doc.seq}, {"delta", toJson(outcome.prediction)}}));
        if (outcome.execute) {
            Job job = jobFor(uri, doc);
            job.document = outcome.execute->document;
            job.params = outcome.execute->params;
            job.interaction = doc.interactionId;
            schedule(doc, std::move(job));
        }
        return Json{{"uri", uri}, {"version", doc.document.version}};
    }

    Json finishInteraction(const std::string& uri, DocumentState& doc) {
        auto outcome = doc.interaction->end();
        broadcast(doc, makeNotification("document/edit", {{"uri", uri},
                                                          {"version", doc.document.version},
                                                          {"edits", Json::array()},
                                                          {"final", true}}));
        if (outcome.execute) {
            Job job = jobFor(uri, doc);
            job.document = outcome.execute->document;
            job.params = outcome.execute->params;
            job.interaction = doc.interactionId;
            schedule(doc, std::move(job));
        }
        if (outcome.finished) {
            doc.interaction.reset();
        }
        return Json{{"uri", uri}, {"version", doc.document.version}};
    }

    Json endInteraction(const Json& params) {
        std::string uri = requireString(params, "uri");
        DocumentState& doc = requireDocument(uri);
        activeInteraction(doc);
        return finishInteraction(uri, doc);
    }

    // -- queries --------------------------------------------------------------------

    Json reveal(const Json& params) {
        std::string uri = requireString(params, "uri");
        std::string elementId = requireString(params, "elementId");
        DocumentState& doc = requireDocument(uri);
        if (doc.displayed) {
            const auto& origins = doc.displayed->execution.elementOrigins;
            if (auto it = origins.find(elementId); it != origins.end()) {
                return Json{{"uri", uri}, {"span", toJson(it->second)}, {"version", doc.displayedVersion}};
            }
        }
        throw ProtocolError("UnknownElement", "no element '" + elementId + "' in the current diagram",
                            {{"elementId", elementId}});
    }

    Json exportDiagram(const Json& params) {
        std::string uri = requireString(params, "uri");
        std::string format = requireString(params, "format");
        DocumentState& doc = requireDocument(uri);
        if (format != "svg") {
            throw ProtocolError("UnsupportedFormat", "format '" + format + "' is not supported; use \"svg\"",
                                {{"supported", {"svg"}}});
        }
        if (!doc.displayed) {
            throw ProtocolError("NoRender", "the document has not been rendered yet");
        }
        return Json{{"uri", uri},
                    {"format", format},
                    {"version", doc.displayedVersion},
                    {"content", render::renderSvg(doc.displayed->layouted)}};
    }

    // -- clients --------------------------------------------------------------------

    void dropClient(ClientId client) {
        for (auto& [uri, doc] : documents) {
            doc.subscribers.erase(client);
            std::erase_if(doc.pendingStarts, [&](const PendingStart& p) { return p.client == client; });
            if (doc.interaction && !doc.interaction->ended() && doc.interactionOwner == client) {
                finishInteraction(uri, doc);
            }
        }
        clients.erase(client);
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() = default;

ClientId Server::connect(SendFn send) {
    ClientId id = impl_->nextClient++;
    impl_->post([impl = impl_.get(), id, send = std::move(send)]() mutable { impl->clients[id] = std::move(send); });
    return id;
}

void Server::disconnect(ClientId client) {
    impl_->post([impl = impl_.get(), client] { impl->dropClient(client); });
}

void Server::receive(ClientId client, std::string message) {
    impl_->post([impl = impl_.get(), client, message = std::move(message)] { impl->handle(client, message); });
}

void Server::waitIdle() {
    std::unique_lock lock(impl_->mutex);
    impl_->idleCv.wait(lock, [&] { return impl_->outstanding == 0; });
}

SchedulerStats Server::stats() const {
    SchedulerStats s;
    s.executionsStarted = impl_->executionsStarted.load();
    s.executionsCompleted = impl_->executionsCompleted.load();
    s.maxInFlightPerDocument = impl_->maxInFlight.load();
    s.schedulerViolations = impl_->violations.load();
    return s;
}

}  // namespace livediag::server
