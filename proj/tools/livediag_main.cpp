#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "livediag/pipeline.hpp"
#include "livediag/render/render.hpp"
#include "livediag/server/transport.hpp"

namespace {

constexpr int kExitDiagnostics = 1;
constexpr int kExitIo = 2;

bool readFile(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
    return true;
}

void printDiagnostics(std::ostream& os, const std::string& file, const livediag::Diagnostics& diagnostics) {
    for (const auto& d : diagnostics) {
        os << file << ":" << d.span.start << ".." << d.span.end << ": " << livediag::toString(d.severity) << ": "
           << d.message << " [" << d.code << "]\n";
    }
}

int render(const std::string& file, const std::string& output, const std::string& format) {
    if (format != "svg") {
        std::cerr << "error: unsupported format '" << format << "' (only svg is available)\n";
        return kExitIo;
    }
    std::string text;
    if (!readFile(file, text)) {
        std::cerr << "error: cannot read " << file << "\n";
        return kExitIo;
    }
    auto result = livediag::runPipeline(text);
    std::string svg = livediag::render::renderSvg(result.layouted);
    if (output.empty() || output == "-") {
        std::cout << svg;
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out || !(out << svg)) {
            std::cerr << "error: cannot write " << output << "\n";
            return kExitIo;
        }
    }
    printDiagnostics(std::cerr, file, result.diagnostics);
    return livediag::hasErrors(result.diagnostics) ? kExitDiagnostics : 0;
}

int check(const std::string& file) {
    std::string text;
    if (!readFile(file, text)) {
        std::cerr << "error: cannot read " << file << "\n";
        return kExitIo;
    }
    auto result = livediag::runPipeline(text);
    printDiagnostics(std::cout, file, result.diagnostics);
    return livediag::hasErrors(result.diagnostics) ? kExitDiagnostics : 0;
}

int serve(bool stdio, int port, const std::string& address, std::size_t workers) {
    livediag::server::ServerOptions options;
    options.workers = workers;
    livediag::server::Server server(options);
    if (stdio) {
        std::ios::sync_with_stdio(false);
        livediag::server::serveStdio(server, std::cin, std::cout);
        return 0;
    }
    try {
        livediag::server::WebSocketServer ws(server, address, static_cast<std::uint16_t>(port));
        std::cerr << "livediag: listening on ws://" << address << ":" << ws.port() << "\n";
        ws.run(true);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot serve on " << address << ":" << port << ": " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"livediag: diagrams as code with live graphical editing"};
    app.require_subcommand(1);

    std::string file;
    std::string output;
    std::string format = "svg";
    auto* renderCmd = app.add_subcommand("render", "run a diagram script and write SVG");
    renderCmd->add_option("file", file, "diagram script")->required();
    renderCmd->add_option("-o,--output", output, "output file, '-' for stdout");
    renderCmd->add_option("--format", format, "output format (svg)");

    auto* checkCmd = app.add_subcommand("check", "print diagnostics; exit 1 when there are errors");
    checkCmd->add_option("file", file, "diagram script")->required();

    bool stdio = false;
    int port = -1;
    std::string address = "127.0.0.1";
    std::size_t workers = 0;
    auto* serveCmd = app.add_subcommand("serve", "run the session server");
    auto* stdioOpt = serveCmd->add_flag("--stdio", stdio, "speak newline-delimited JSON on stdin/stdout");
    auto* portOpt = serveCmd->add_option("--port", port, "websocket port (0 picks a free one)")
                        ->check(CLI::Range(0, 65535));
    serveCmd->add_option("--address", address, "websocket bind address");
    serveCmd->add_option("--workers", workers, "execution threads (0: host parallelism)");
    stdioOpt->excludes(portOpt);
    serveCmd->callback([&] {
        if (!stdio && port < 0) {
            throw CLI::ValidationError("serve", "one of --stdio or --port is required");
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitIo;
    }

    if (*renderCmd) {
        return render(file, output, format);
    }
    if (*checkCmd) {
        return check(file);
    }
    if (*serveCmd) {
        return serve(stdio, port, address, workers);
    }
    return kExitIo;
}
