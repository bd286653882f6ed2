#include "fixtures.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fixtures {

namespace {

const char* kCTemplates[] = {
    "int @fn@(int @p@) {\n"
    "  int @a@ = @p@ + @k@;\n"
    "  int @b@ = @a@ * 2;\n"
    "  if (@b@ > @k@) {\n"
    "    @a@ = @a@ - @b@;\n"
    "  }\n"
    "  return @a@ + @b@;\n"
    "}\n",

    "static double @fn@(const double *@p@, int n) {\n"
    "  double @a@ = 0.0;\n"
    "  for (int @b@ = 0; @b@ < n; @b@++) {\n"
    "    @a@ += @p@[@b@];\n"
    "  }\n"
    "  return @a@ / @k@;\n"
    "}\n",

    "#include <string.h>\n"
    "size_t @fn@(const char *@p@) {\n"
    "  size_t @a@ = strlen(@p@);\n"
    "  int @b@ = @k@ * 3;\n"
    "  while (@a@ > @k@) {\n"
    "    @a@--;\n"
    "  }\n"
    "  return @a@ + @b@;\n"
    "}\n",
};

const char* kPythonTemplates[] = {
    "def @fn@(@p@):\n"
    "    @a@ = @p@ + @k@\n"
    "    @b@ = [@a@ * i for i in range(@k@)]\n"
    "    if @a@ > @k@:\n"
    "        @a@ = @a@ - 1\n"
    "    return @a@ + len(@b@)\n",

    "def @fn@(@p@, items):\n"
    "    @a@ = 0\n"
    "    @b@ = @k@\n"
    "    for item in items:\n"
    "        @a@ += item * @b@\n"
    "    return @a@ + @p@\n",

    "class Holder:\n"
    "    def @fn@(self, @p@):\n"
    "        @a@ = @p@.strip()\n"
    "        @b@ = @a@.split(\",\")\n"
    "        return len(@b@) + @k@\n",
};

const char* kJavaTemplates[] = {
    "public class @cls@ {\n"
    "    public int @fn@(int @p@) {\n"
    "        int @a@ = @p@ + @k@;\n"
    "        int @b@ = @a@ * 2;\n"
    "        return @a@ - @b@;\n"
    "    }\n"
    "}\n",

    "class @cls@ {\n"
    "    static String @fn@(String @p@) {\n"
    "        StringBuilder @a@ = new StringBuilder();\n"
    "        for (int @b@ = 0; @b@ < @k@; @b@++) {\n"
    "            @a@.append(@p@);\n"
    "        }\n"
    "        return @a@.toString();\n"
    "    }\n"
    "}\n",

    "class @cls@ {\n"
    "    private int stored;\n"
    "    int @fn@(int[] @p@) {\n"
    "        int @a@ = 0;\n"
    "        for (int @b@ : @p@) {\n"
    "            @a@ += @b@;\n"
    "        }\n"
    "        stored = @a@;\n"
    "        return @a@ * @k@;\n"
    "    }\n"
    "}\n",
};

const std::vector<std::string> kFunctionNames = {"compute", "process", "handle", "update",
                                                 "check_value", "scan", "reduce_all", "walk"};
const std::vector<std::string> kClassNames = {"Worker", "Parser", "Buffer", "Tracker", "Engine"};
const std::vector<std::string> kVariableNames = {
    "total", "idx",    "value", "buf",    "result", "tmp",   "acc",  "cursor",
    "offset", "width", "height", "limit", "acc2",   "piece", "node", "delta",
    "level", "weight", "score", "marker", "span",   "depth", "head", "tail"};

std::string Fill(std::string text, const std::string& key, const std::string& value) {
  std::string marker = "@" + key + "@";
  for (std::size_t pos = text.find(marker); pos != std::string::npos;
       pos = text.find(marker, pos + value.size())) {
    text.replace(pos, marker.size(), value);
  }
  return text;
}

}  // namespace

std::vector<Snippet> MutationCorpus(std::size_t per_language, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  std::vector<Snippet> out;
  struct Family {
    iclforge::Language lang;
    const char* const* templates;
  };
  const Family families[] = {{iclforge::Language::kC, kCTemplates},
                             {iclforge::Language::kPython, kPythonTemplates},
                             {iclforge::Language::kJava, kJavaTemplates}};
  for (const auto& f : families) {
    for (std::size_t i = 0; i < per_language; ++i) {
      std::vector<std::string> vars;
      while (vars.size() < 3) {
        std::string v = pick(kVariableNames);
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      }
      std::string code = f.templates[i % 3];
      code = Fill(code, "fn", pick(kFunctionNames));
      code = Fill(code, "cls", pick(kClassNames));
      code = Fill(code, "p", vars[0]);
      code = Fill(code, "a", vars[1]);
      code = Fill(code, "b", vars[2]);
      code = Fill(code, "k", std::to_string(2 + rng() % 97));
      out.push_back({code, f.lang});
    }
  }
  return out;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "iclforge-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int RunCli(const std::string& cli, const std::vector<std::string>& args) {
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(cli.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      dup2(devnull, 1);
      dup2(devnull, 2);
    }
    execv(cli.c_str(), argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace fixtures
