#include "logae/synthgen.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "logae/ingest.hpp"
#include "logae/model.hpp"

namespace logae {

namespace {

using json = nlohmann::ordered_json;

constexpr std::int64_t kHour = 3600000;
constexpr std::int64_t kDay = 24 * kHour;
constexpr std::int64_t kMinute = 60000;

// ---------------------------------------------------------------- randomness

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double unit() { return uniform01(rng_); }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(unit() * static_cast<double>(hi - lo + 1));
  }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(v.size()) - 1))];
  }
  std::size_t weighted(const std::vector<double>& w) {
    double total = 0;
    for (double x : w) total += x;
    double u = unit() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (u < w[i]) return i;
      u -= w[i];
    }
    return w.size() - 1;
  }
  std::string hex(int n) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    for (int i = 0; i < n; ++i) s += kDigits[between(0, 15)];
    return s;
  }

 private:
  Rng rng_;
};

// ---------------------------------------------------------------- profiles

enum Act : std::size_t { kModule, kFlow, kFile, kRegistry, kSession, kTask, kSpawn, kActCount };

enum class Span { kSmall, kMedium, kLarge };

struct FlowKind {
  std::vector<std::string> subnets;  // a.b.c
  std::vector<int> ports;
  std::string protocol;
  std::string direction;
  Span span;
  double weight;
};

struct Profile {
  std::string name;
  std::string dir;
  std::string parent;  // profile name, or "" for boot-time processes
  bool system = false;
  double activity = 1;
  int max_live = 1;
  std::vector<std::string> args;
  std::vector<std::string> modules;
  std::vector<FlowKind> flows;
  std::string file_dir;
  std::vector<std::string> files;
  std::vector<std::string> registry;
  std::array<double, kActCount> mix{};
  double tail = 0;  // chance a file/flow event uses a one-off value

  std::string image() const { return dir + name; }
};

std::vector<Profile> catalog(const std::string& user) {
  const std::string sys = "C:\\Windows\\System32\\";
  const std::string home = "C:\\Users\\" + user + "\\";
  const std::string office = "C:\\Program Files\\Microsoft Office\\root\\Office16\\";
  const std::string hkcu = "HKCU\\Software\\Microsoft\\";
  std::vector<Profile> p;

  p.push_back({"services.exe", sys, "", true, 0.5, 1, {""},
               {"ntdll.dll", "kernel32.dll", "rpcrt4.dll", "sechost.dll"},
               {},
               sys + "LogFiles\\", {"scm.log"},
               {"HKLM\\SYSTEM\\CurrentControlSet\\Services\\Dnscache",
                "HKLM\\SYSTEM\\CurrentControlSet\\Services\\Tcpip\\Parameters",
                "HKLM\\SYSTEM\\CurrentControlSet\\Services\\W32Time\\Config"},
               {0.2, 0, 0.1, 0.6, 0, 0, 0.1}});
  p.push_back({"svchost.exe", sys, "services.exe", true, 6, 8,
               {"-k netsvcs -p", "-k LocalService", "-k NetworkService", "-k DcomLaunch"},
               {"ntdll.dll", "kernel32.dll", "rpcrt4.dll", "sechost.dll", "ws2_32.dll", "dnsapi.dll"},
               {{{"10.0.0"}, {53}, "17", "outbound", Span::kSmall, 4},
                {{"10.0.0"}, {123}, "17", "outbound", Span::kSmall, 1},
                {{"10.0.1"}, {135}, "6", "outbound", Span::kSmall, 1},
                {{"10.0.1"}, {49668, 49670}, "6", "outbound", Span::kMedium, 1},
                {{"10.0.4"}, {445}, "6", "inbound", Span::kMedium, 1}},
               sys + "sru\\", {"SRUDB.dat", "edb.log", "setupapi.dev.log", "Diagnosis.evtx"},
               {"HKLM\\SOFTWARE\\Microsoft\\Windows NT\\CurrentVersion\\Schedule\\TaskCache",
                "HKLM\\SYSTEM\\CurrentControlSet\\Control\\Session Manager",
                "HKLM\\SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\WindowsUpdate"},
               {0.15, 0.35, 0.15, 0.2, 0, 0.1, 0.05}});
  p.push_back({"lsass.exe", sys, "", true, 1.5, 1, {""},
               {"ntdll.dll", "kernel32.dll", "samsrv.dll", "lsasrv.dll"},
               {{{"10.0.1"}, {88}, "6", "outbound", Span::kSmall, 2},
                {{"10.0.1"}, {389}, "6", "outbound", Span::kSmall, 1}},
               "", {}, {"HKLM\\SECURITY\\Policy\\Secrets"},
               {0.1, 0.3, 0, 0.1, 0.5, 0, 0}});
  p.push_back({"explorer.exe", "C:\\Windows\\", "", false, 3, 1, {""},
               {"shell32.dll", "ole32.dll", "user32.dll", "ntdll.dll", "kernel32.dll",
                "windows.storage.dll"},
               {},
               home + "AppData\\Roaming\\Microsoft\\Windows\\Recent\\",
               {"desktop.ini", "thumbcache_256.db", "Budget.xlsx.lnk", "Notes.txt.lnk"},
               {hkcu + "Windows\\CurrentVersion\\Explorer\\RecentDocs",
                hkcu + "Windows\\CurrentVersion\\Explorer\\UserAssist",
                hkcu + "Windows\\CurrentVersion\\Explorer\\Shell Folders"},
               {0.15, 0, 0.35, 0.3, 0, 0, 0.2}, 0.03});
  p.push_back({"chrome.exe", "C:\\Program Files\\Google\\Chrome\\Application\\", "explorer.exe", false,
               5, 4, {"--type=renderer", "--type=gpu-process", "--type=utility", ""},
               {"chrome.dll", "chrome_elf.dll", "msvcp140.dll", "vcruntime140.dll", "ws2_32.dll",
                "ntdll.dll"},
               {{{"142.250.64", "172.217.12", "151.101.1", "104.16.132"}, {443}, "6", "outbound",
                 Span::kMedium, 5},
                {{"142.250.64", "151.101.1"}, {80}, "6", "outbound", Span::kSmall, 1},
                {{"10.0.0"}, {53}, "17", "outbound", Span::kSmall, 1}},
               home + "AppData\\Local\\Google\\Chrome\\User Data\\Default\\",
               {"Cookies", "History", "Current Session", "data_1", "data_2", "index"},
               {"HKCU\\Software\\Google\\Chrome\\BLBeacon"},
               {0.25, 0.45, 0.25, 0.05, 0, 0, 0.05}, 0.02});
  p.push_back({"winword.exe", office, "explorer.exe", false, 2, 1, {"/n", "/q"},
               {"wwlib.dll", "mso.dll", "msvcp140.dll", "vcruntime140.dll", "oleaut32.dll", "ntdll.dll"},
               {{{"52.109.8", "52.109.12"}, {443}, "6", "outbound", Span::kMedium, 1}},
               home + "Documents\\",
               {"Normal.dotm", "Q3_report.docx", "meeting_notes.docx", "~WRL0001.tmp", "proposal.docx"},
               {hkcu + "Office\\16.0\\Word\\Options", hkcu + "Office\\16.0\\Word\\Reading Locations",
                hkcu + "Office\\16.0\\Common\\Roaming"},
               {0.3, 0.15, 0.35, 0.2, 0, 0, 0}, 0.03});
  p.push_back({"outlook.exe", office, "explorer.exe", false, 2.5, 1, {"/recycle"},
               {"olmapi32.dll", "mso.dll", "msvcp140.dll", "vcruntime140.dll", "ntdll.dll"},
               {{{"40.97.120", "40.97.156"}, {443}, "6", "outbound", Span::kLarge, 1}},
               home + "AppData\\Local\\Microsoft\\Outlook\\", {"user.ost", "Outlook.srs", "extend.dat"},
               {hkcu + "Office\\16.0\\Outlook\\Profiles", hkcu + "Office\\16.0\\Outlook\\Preferences"},
               {0.2, 0.4, 0.3, 0.1, 0, 0, 0}});
  p.push_back({"onedrive.exe", home + "AppData\\Local\\Microsoft\\OneDrive\\", "explorer.exe", false, 1,
               1, {"/background"}, {"filesyncclient.dll", "ntdll.dll", "kernel32.dll", "winhttp.dll"},
               {{{"13.107.42"}, {443}, "6", "outbound", Span::kLarge, 1}},
               home + "AppData\\Local\\Microsoft\\OneDrive\\logs\\", {"SyncEngine.odl", "settings.dat"},
               {}, {0.2, 0.5, 0.3, 0, 0, 0, 0}});
  p.push_back({"taskhostw.exe", sys, "svchost.exe", true, 1, 2, {""},
               {"ntdll.dll", "kernel32.dll", "taskschd.dll"}, {}, "", {}, {},
               {0.3, 0, 0, 0, 0, 0.7, 0}});
  p.push_back({"wmiprvse.exe", sys + "wbem\\", "svchost.exe", true, 1, 2, {"-secured -Embedding"},
               {"wbemcomn.dll", "wbemprox.dll", "fastprox.dll", "ntdll.dll"}, {},
               sys + "wbem\\Repository\\", {"OBJECTS.DATA", "INDEX.BTR", "MAPPING1.MAP"},
               {"HKLM\\SOFTWARE\\Microsoft\\WBEM\\CIMOM"}, {0.4, 0, 0.3, 0.3, 0, 0, 0}});
  p.push_back({"SearchIndexer.exe", sys, "services.exe", true, 1, 1, {"/Embedding"},
               {"mssrch.dll", "tquery.dll", "ntdll.dll"}, {},
               "C:\\ProgramData\\Microsoft\\Search\\Data\\Applications\\Windows\\",
               {"Windows.edb", "MSS.log", "tmp.edb"}, {}, {0.2, 0, 0.8, 0, 0, 0, 0}});
  p.push_back({"powershell.exe", sys + "WindowsPowerShell\\v1.0\\", "explorer.exe", false, 0.15, 1,
               {"-NoProfile -File C:\\scripts\\backup.ps1"},
               {"System.Management.Automation.ni.dll", "clr.dll", "ntdll.dll"},
               {{{"10.0.2"}, {445}, "6", "outbound", Span::kMedium, 1}}, "C:\\scripts\\",
               {"backup.ps1", "backup.log"}, {}, {0.4, 0.2, 0.4, 0, 0, 0, 0}});
  return p;
}

const std::vector<std::string> kTasks = {
    "\\Microsoft\\Windows\\UpdateOrchestrator\\Schedule Scan",
    "\\Microsoft\\Windows\\Defrag\\ScheduledDefrag", "\\GoogleUpdateTaskMachineUA",
    "\\Microsoft\\Office\\OfficeTelemetryAgentLogOn"};

const std::vector<std::string> kUsers = {"zleazer", "bantonio", "hmaddox", "kpatel", "rnavarro",
                                         "tjensen", "mokafor", "lchen"};

// ---------------------------------------------------------------- host simulation

struct Instance {
  std::int64_t pid = 0;
  std::int64_t created = 0;
  std::string image;
  std::string command_line;
  std::size_t profile = 0;  // index into profiles, or attack marker
};

struct Record {
  std::int64_t t = 0;
  std::string line;
  bool malicious = false;
};

class HostSim {
 public:
  HostSim(Draw& draw, std::string host, int index)
      : draw_(draw),
        host_(std::move(host)),
        user_(kUsers[static_cast<std::size_t>(index) % kUsers.size()]),
        profiles_(catalog(user_)),
        live_(profiles_.size()) {
    user_sid_ = "S-1-5-21-1406866233-2305489652-3283453473-" + std::to_string(1100 + index);
    logon_ids_ = {"0x" + draw_.hex(6), "0x" + draw_.hex(6)};
    host_ip_ = "10.0.4." + std::to_string(20 + index);
  }

  const std::string& user() const { return user_; }
  std::string home() const { return "C:\\Users\\" + user_ + "\\"; }

  void boot(std::int64_t t) {
    for (std::size_t i = 0; i < profiles_.size(); ++i)
      spawn(i, t);
  }

  Record benign(std::int64_t t) {
    std::vector<double> activity;
    for (std::size_t i = 0; i < profiles_.size(); ++i)
      activity.push_back(live_[i].empty() ? 0.0 : profiles_[i].activity);
    const std::size_t pi = draw_.weighted(activity);
    const Profile& prof = profiles_[pi];
    const Instance actor = draw_.pick(live_[pi]);
    std::vector<double> mix(prof.mix.begin(), prof.mix.end());
    if (children_of(prof.name).empty()) mix[kSpawn] = 0;
    switch (static_cast<Act>(draw_.weighted(mix))) {
      case kModule:
        return {t, module_load(t, actor, draw_.pick(prof.modules)), false};
      case kFlow:
        return {t, benign_flow(t, actor, prof), false};
      case kFile:
        return {t, benign_file(t, actor, prof), false};
      case kRegistry:
        return {t, registry(t, actor, draw_.pick(prof.registry), "EDIT", "LastUsed"), false};
      case kSession:
        return {t, session(t, actor), false};
      case kTask:
        return {t, task(t, actor), false};
      case kSpawn:
      default: {
        const auto kids = children_of(prof.name);
        std::vector<double> w;
        for (std::size_t k : kids) w.push_back(profiles_[k].activity);
        const std::size_t child = kids[draw_.weighted(w)];
        const Instance made = spawn(child, t);
        return {t, creation(t, made, actor), false};
      }
    }
  }

  // ---- attack support

  Instance start_attack_process(std::int64_t t, const std::string& image, const std::string& cmd) {
    // Attack pids come from their own never-reused range so no benign
    // instance ever shares a pid with a seed.
    next_attack_pid_ += 4;
    Instance inst{next_attack_pid_, t, image, cmd, kAttackProfile};
    attack_live_.push_back(inst);
    return inst;
  }
  void end_attack() { attack_live_.clear(); }
  const Instance& office_parent() {
    const auto i = profile_index(draw_.chance(0.5) ? "winword.exe" : "outlook.exe");
    return live_[i].front();
  }
  const Instance& svchost() { return draw_.pick(live_[profile_index("svchost.exe")]); }

  std::string creation(std::int64_t t, const Instance& child, const Instance& parent) {
    json props;
    props["image_path"] = child.image;
    props["parent_image_path"] = parent.image;
    props["command_line"] = child.command_line;
    props["user"] = principal_of(child);
    props["sid"] = sid_of(child);
    props["logon_id"] = logon_of(child);
    return record(t, "PROCESS", "CREATE", child.pid, parent.pid, principal_of(child), std::move(props));
  }
  std::string module_load(std::int64_t t, const Instance& actor, const std::string& module) {
    json props;
    props["image_path"] = actor.image;
    props["module_path"] = module_dir(module) + module;
    return record(t, "MODULE", "LOAD", actor.pid, std::nullopt, principal_of(actor), std::move(props));
  }
  std::string flow(std::int64_t t, const Instance& actor, const std::string& ip,
                   std::optional<int> port, const std::string& protocol,
                   const std::string& direction, Span span) {
    std::int64_t dur = 0;
    switch (span) {
      case Span::kSmall: dur = draw_.between(5, 900); break;
      case Span::kMedium: dur = draw_.between(1000, 45000); break;
      case Span::kLarge: dur = draw_.between(60000, 900000); break;
    }
    json props;
    props["image_path"] = actor.image;
    props["direction"] = direction;
    props["l4protocol"] = protocol;
    props["src_ip"] = host_ip_;
    props["src_port"] = draw_.between(49152, 65535);
    props["dest_ip"] = ip;
    if (port) props["dest_port"] = *port;
    props["start_time"] = iso(t);
    props["end_time"] = iso(t + dur);
    return record(t, "FLOW", "START", actor.pid, std::nullopt, principal_of(actor), std::move(props));
  }
  std::string file(std::int64_t t, const Instance& actor, const std::string& action,
                   const std::string& path, const std::string& new_path = {}) {
    json props;
    props["image_path"] = actor.image;
    props["file_path"] = path;
    if (!new_path.empty()) props["new_path"] = new_path;
    if (action == "READ" || action == "WRITE") props["info_class"] = "FileStandardInformation";
    props["size"] = draw_.between(0, 1 << 20);
    return record(t, "FILE", action, actor.pid, std::nullopt, principal_of(actor), std::move(props));
  }
  std::string registry(std::int64_t t, const Instance& actor, const std::string& key,
                       const std::string& action, const std::string& value) {
    json props;
    props["image_path"] = actor.image;
    props["key"] = key;
    props["value"] = value;
    props["type"] = draw_.chance(0.5) ? "REG_SZ" : "REG_DWORD";
    return record(t, "REGISTRY", action, actor.pid, std::nullopt, principal_of(actor), std::move(props));
  }

  const std::vector<Instance>& attack_live() const { return attack_live_; }
  Draw& draw() { return draw_; }

 private:
  static constexpr std::size_t kAttackProfile = static_cast<std::size_t>(-1);

  std::size_t profile_index(const std::string& name) const {
    for (std::size_t i = 0; i < profiles_.size(); ++i)
      if (profiles_[i].name == name) return i;
    throw Error("synthgen: unknown profile " + name);
  }
  std::vector<std::size_t> children_of(const std::string& name) const {
    std::vector<std::size_t> kids;
    for (std::size_t i = 0; i < profiles_.size(); ++i)
      if (profiles_[i].parent == name) kids.push_back(i);
    return kids;
  }

  std::int64_t allocate_pid() {
    do {
      next_pid_ += 4;
      if (next_pid_ >= 60000) next_pid_ = 1000;
    } while (used_pids_.count(next_pid_));
    used_pids_.insert(next_pid_);
    return next_pid_;
  }

  Instance spawn(std::size_t pi, std::int64_t t) {
    const Profile& prof = profiles_[pi];
    Instance inst{allocate_pid(), t, prof.image(), "", pi};
    const std::string& args = draw_.pick(prof.args);
    inst.command_line = "\"" + inst.image + "\"" + (args.empty() ? "" : " " + args);
    auto& live = live_[pi];
    live.push_back(inst);
    if (static_cast<int>(live.size()) > prof.max_live) {
      used_pids_.erase(live.front().pid);
      live.erase(live.begin());
    }
    return inst;
  }

  std::string principal_of(const Instance& inst) const {
    if (inst.profile != kAttackProfile && profiles_[inst.profile].system) return "NT AUTHORITY\\SYSTEM";
    return "SYSTEMIA\\" + user_;
  }
  std::string sid_of(const Instance& inst) const {
    if (inst.profile != kAttackProfile && profiles_[inst.profile].system) return "S-1-5-18";
    return user_sid_;
  }
  std::string logon_of(const Instance& inst) const {
    if (inst.profile != kAttackProfile && profiles_[inst.profile].system) return "0x3e7";
    return logon_ids_[0];
  }
  std::string module_dir(const std::string& module) const {
    if (module == "chrome.dll" || module == "chrome_elf.dll")
      return "C:\\Program Files\\Google\\Chrome\\Application\\118.0.5993.89\\";
    if (module == "wwlib.dll" || module == "mso.dll" || module == "olmapi32.dll")
      return "C:\\Program Files\\Microsoft Office\\root\\Office16\\";
    return "C:\\Windows\\System32\\";
  }

  std::string benign_flow(std::int64_t t, const Instance& actor, const Profile& prof) {
    std::vector<double> w;
    for (const auto& f : prof.flows) w.push_back(f.weight);
    const FlowKind& kind = prof.flows[draw_.weighted(w)];
    std::string subnet = draw_.pick(kind.subnets);
    if (draw_.chance(prof.tail))
      subnet = std::to_string(draw_.between(20, 220)) + "." + std::to_string(draw_.between(0, 255)) +
               "." + std::to_string(draw_.between(0, 255));
    const std::string ip = subnet + "." + std::to_string(draw_.between(1, 254));
    return flow(t, actor, ip, draw_.pick(kind.ports), kind.protocol, kind.direction, kind.span);
  }

  std::string benign_file(std::int64_t t, const Instance& actor, const Profile& prof) {
    static const std::vector<std::string> kActions = {"READ", "READ", "READ", "WRITE", "WRITE", "CREATE",
                                                      "DELETE", "RENAME"};
    std::string name = draw_.pick(prof.files);
    if (draw_.chance(prof.tail)) name = "Doc_" + draw_.hex(6) + ".docx";
    const std::string& action = draw_.pick(kActions);
    if (action == "RENAME") return file(t, actor, action, prof.file_dir + name, prof.file_dir + name + ".bak");
    return file(t, actor, action, prof.file_dir + name);
  }

  std::string session(std::int64_t t, const Instance& actor) {
    json props;
    const bool system = draw_.chance(0.4);
    props["user_name"] = system ? "SYSTEM" : user_;
    props["requesting_user"] = system ? "SYSTEM" : user_;
    props["requesting_domain"] = system ? "NT AUTHORITY" : "SYSTEMIA";
    props["requesting_logon_id"] = "0x3e7";
    props["logon_id"] = system ? "0x3e7" : draw_.pick(logon_ids_);
    props["sid"] = system ? "S-1-5-18" : user_sid_;
    return record(t, "USER_SESSION", draw_.chance(0.7) ? "LOGIN" : "LOGOUT", actor.pid, std::nullopt,
                  principal_of(actor), std::move(props));
  }

  std::string task(std::int64_t t, const Instance& actor) {
    json props;
    const std::string& name = draw_.pick(kTasks);
    props["task_name"] = name;
    props["path"] = "C:\\Windows\\System32\\Tasks" + name;
    props["user"] = principal_of(actor);
    return record(t, "TASK", draw_.chance(0.8) ? "START" : "CREATE", actor.pid, std::nullopt,
                  principal_of(actor), std::move(props));
  }

  static std::string iso(std::int64_t ms) {
    // Host-local time with the capture's -04:00 offset.
    std::string s = format_timestamp(ms - 4 * kHour);
    s.pop_back();
    return s + "-04:00";
  }

  std::string record(std::int64_t t, const char* object, const std::string& action, std::int64_t pid,
                     std::optional<std::int64_t> ppid, const std::string& principal, json props) {
    json j;
    j["id"] = draw_.hex(8) + "-" + draw_.hex(4) + "-" + draw_.hex(4) + "-" + draw_.hex(4) + "-" + draw_.hex(12);
    j["timestamp"] = iso(t);
    j["hostname"] = host_;
    j["object"] = object;
    j["action"] = action;
    j["actorID"] = draw_.hex(16);
    j["pid"] = pid;
    if (ppid) j["ppid"] = *ppid;
    j["tid"] = draw_.between(100, 9000);
    j["principal"] = principal;
    j["properties"] = std::move(props);
    return j.dump();
  }

  Draw& draw_;
  std::string host_;
  std::string user_;
  std::string user_sid_;
  std::vector<std::string> logon_ids_;
  std::string host_ip_;
  std::vector<Profile> profiles_;
  std::vector<std::vector<Instance>> live_;
  std::vector<Instance> attack_live_;
  std::set<std::int64_t> used_pids_;
  std::int64_t next_pid_ = 996;
  std::int64_t next_attack_pid_ = 60000;
};

// ---------------------------------------------------------------- attacks

enum class Step { kBenign, kSeed, kChild, kActivity, kSweep, kWindowEnd };

struct Scheduled {
  std::int64_t t;
  Step step;
  std::size_t window;
};

struct WindowPlan {
  AttackWindow window;
  std::size_t process_events = 0;  // includes seed and child creations
  std::size_t children = 0;
  std::size_t sweeps = 0;
  std::string c2_subnet;
  std::string sweep_subnet;
  std::optional<Instance> seed;
};

std::vector<std::size_t> split_evenly(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, parts ? total / parts : 0);
  for (std::size_t i = 0; i < (parts ? total % parts : 0); ++i) ++out[i];
  return out;
}

std::string attack_activity(HostSim& sim, Draw& d, std::int64_t t, const WindowPlan& plan) {
  const Instance& actor = d.pick(sim.attack_live());
  const std::string temp = sim.home() + "AppData\\Local\\Temp\\";
  const double u = d.unit();
  if (u < 0.30) {
    const std::string module =
        d.chance(0.6) ? d.hex(8) + ".dll"
                      : d.pick(std::vector<std::string>{"ntdll.dll", "kernel32.dll", "ws2_32.dll", "wininet.dll"});
    return sim.module_load(t, actor, module);
  }
  if (u < 0.60) {
    if (d.chance(0.7))
      return sim.flow(t, actor, plan.c2_subnet + "." + std::to_string(d.between(1, 254)),
                      d.pick(std::vector<int>{4444, 8443, 1337, 9001}), "6", "outbound", Span::kLarge);
    return sim.flow(t, actor, "10.0.4." + std::to_string(d.between(1, 254)), 445, "6", "outbound",
                    Span::kMedium);
  }
  if (u < 0.85) {
    std::string name = d.chance(0.3) ? "desktop.ini"
                                     : d.pick(std::vector<std::string>{d.hex(8) + ".zip", "lsass.dmp",
                                                                       d.hex(6) + ".ps1", "creds.txt"});
    return sim.file(t, actor, d.chance(0.5) ? "WRITE" : "CREATE", temp + name);
  }
  return sim.registry(t, actor, "HKCU\\Software\\Microsoft\\Windows\\CurrentVersion\\Run", "ADD",
                      d.hex(10));
}

}  // namespace

// ---------------------------------------------------------------- config

std::int64_t ScenarioConfig::test_start_ms() const { return start_ms + train_days * kDay; }
std::int64_t ScenarioConfig::test_end_ms() const { return test_start_ms() + test_days * kDay; }

std::vector<AttackWindow> ScenarioConfig::effective_windows() const {
  if (!windows.empty()) return windows;
  std::vector<AttackWindow> out;
  const std::int64_t offsets[] = {10 * kHour, 14 * kHour, 9 * kHour};
  for (int day = 0; day < test_days; ++day) {
    const std::int64_t s = test_start_ms() + day * kDay + offsets[day % 3];
    out.push_back({s, s + 2 * kHour - 1});
  }
  return out;
}

std::string ScenarioConfig::host_name(int host) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "SysClient%04d.systemia.com", 201 + host);
  return buf;
}

void ScenarioConfig::validate() const {
  if (hosts < 1) throw Error("synth: hosts must be >= 1");
  if (attacked_hosts < 0 || attacked_hosts > hosts) throw Error("synth: attacked_hosts out of range");
  if (!(attack_fraction >= 0 && attack_fraction <= 1)) throw Error("synth: attack_fraction must lie in [0, 1]");
  if (!(sweep_share >= 0 && sweep_share <= 1)) throw Error("synth: sweep_share must lie in [0, 1]");
  if (train_days < 1 || test_days < 1) throw Error("synth: train_days and test_days must be >= 1");
  if (train_records < static_cast<std::size_t>(hosts)) throw Error("synth: need at least one train record per host");
  for (const auto& w : effective_windows()) {
    if (w.start_ms > w.end_ms) throw Error("synth: attack window ends before it starts");
    if (w.start_ms < test_start_ms() || w.end_ms >= test_end_ms())
      throw Error("synth: attack window outside the test period");
  }
  const auto malicious = static_cast<std::size_t>(std::llround(attack_fraction * static_cast<double>(test_records)));
  if (malicious > 0 && attacked_hosts == 0) throw Error("synth: attack_fraction > 0 needs an attacked host");
  if (attacked_hosts > 0 && malicious > test_records / static_cast<std::size_t>(hosts))
    throw Error("synth: attack volume exceeds the attacked hosts' test records");
}

// ---------------------------------------------------------------- generation

std::size_t SyntheticCorpus::malicious_count() const {
  return static_cast<std::size_t>(std::count(test_malicious.begin(), test_malicious.end(), true));
}

std::string SyntheticCorpus::summary_text() const {
  std::ostringstream os;
  os << "host\tattacked\ttrain_records\ttest_records\ttest_malicious\n";
  for (const auto& h : hosts)
    os << h.host << '\t' << (h.attacked ? 1 : 0) << '\t' << h.train_records << '\t' << h.test_records
       << '\t' << h.test_malicious << '\n';
  return os.str();
}

SyntheticCorpus generate_corpus(const ScenarioConfig& config) {
  config.validate();
  Draw draw(config.seed);
  SyntheticCorpus out;

  const auto train_split = split_evenly(config.train_records, static_cast<std::size_t>(config.hosts));
  const auto test_split = split_evenly(config.test_records, static_cast<std::size_t>(config.hosts));
  const auto total_malicious =
      static_cast<std::size_t>(std::llround(config.attack_fraction * static_cast<double>(config.test_records)));
  const auto malicious_split =
      split_evenly(total_malicious, static_cast<std::size_t>(std::max(config.attacked_hosts, 1)));
  const auto windows = config.effective_windows();

  std::vector<Record> all_train, all_test;
  for (int h = 0; h < config.hosts; ++h) {
    const std::string host = config.host_name(h);
    HostSim sim(draw, host, h);
    sim.boot(config.start_ms - kHour);
    HostSummary summary{host, h < config.attacked_hosts, train_split[static_cast<std::size_t>(h)],
                        test_split[static_cast<std::size_t>(h)], 0};

    std::vector<std::int64_t> times(summary.train_records);
    for (auto& t : times) t = draw.between(config.start_ms, config.test_start_ms() - 1);
    std::sort(times.begin(), times.end());
    for (auto t : times) all_train.push_back(sim.benign(t));

    // Test period: benign traffic interleaved with scheduled attack steps.
    const std::size_t malicious = summary.attacked ? malicious_split[static_cast<std::size_t>(h)] : 0;
    std::vector<WindowPlan> plans;
    std::vector<Scheduled> schedule;
    if (malicious > 0) {
      const auto per_window = split_evenly(malicious, windows.size());
      for (std::size_t w = 0; w < windows.size(); ++w) {
        WindowPlan plan;
        plan.window = windows[w];
        const std::size_t budget = per_window[w];
        plan.sweeps = std::min<std::size_t>(
            budget > 0 ? budget - 1 : 0,
            static_cast<std::size_t>(std::llround(config.sweep_share * static_cast<double>(budget))));
        plan.process_events = budget - plan.sweeps;
        plan.children = plan.process_events > 1 ? std::min<std::size_t>(plan.process_events - 1, 3) : 0;
        plan.c2_subnet = "185." + std::to_string(draw.between(100, 199)) + "." +
                         std::to_string(draw.between(0, 255));
        plan.sweep_subnet = "10.99." + std::to_string(w + 1);
        if (plan.process_events > 0) {
          const std::int64_t seed_t = plan.window.start_ms + draw.between(0, 5 * kMinute);
          schedule.push_back({seed_t, Step::kSeed, w});
          for (std::size_t c = 0; c < plan.children; ++c)
            schedule.push_back({draw.between(seed_t + 1, plan.window.end_ms), Step::kChild, w});
          for (std::size_t a = 1 + plan.children; a < plan.process_events; ++a)
            schedule.push_back({draw.between(seed_t + 1, plan.window.end_ms), Step::kActivity, w});
        }
        for (std::size_t s = 0; s < plan.sweeps; ++s)
          schedule.push_back({draw.between(plan.window.start_ms, plan.window.end_ms), Step::kSweep, w});
        schedule.push_back({plan.window.end_ms, Step::kWindowEnd, w});
        plans.push_back(std::move(plan));
      }
    }
    const std::size_t benign_count = summary.test_records - malicious;
    for (std::size_t i = 0; i < benign_count; ++i)
      schedule.push_back({draw.between(config.test_start_ms(), config.test_end_ms() - 1), Step::kBenign, 0});
    // Window ends sort after same-millisecond attack steps.
    std::stable_sort(schedule.begin(), schedule.end(), [](const Scheduled& a, const Scheduled& b) {
      if (a.t != b.t) return a.t < b.t;
      return (a.step == Step::kWindowEnd) < (b.step == Step::kWindowEnd);
    });

    std::size_t sweep_host = 0;
    for (const auto& s : schedule) {
      WindowPlan* plan = plans.empty() ? nullptr : &plans[s.window];
      switch (s.step) {
        case Step::kBenign:
          all_test.push_back(sim.benign(s.t));
          break;
        case Step::kSeed: {
          const Instance parent = sim.office_parent();
          const std::string image = sim.home() + "AppData\\Local\\Temp\\" + draw.hex(8) + ".exe";
          const Instance seed = sim.start_attack_process(s.t, image, "\"" + image + "\" -s");
          plan->seed = seed;
          out.truth.seeds.push_back({host, seed.pid, plan->window.start_ms, plan->window.end_ms});
          all_test.push_back({s.t, sim.creation(s.t, seed, parent), true});
          break;
        }
        case Step::kChild: {
          const Instance parent = draw.pick(sim.attack_live());
          static const std::vector<std::string> kTools = {"cmd.exe", "powershell.exe", "whoami.exe", "net.exe"};
          std::string image = draw.chance(0.3) ? sim.home() + "AppData\\Local\\Temp\\" + draw.hex(6) + ".exe"
                                               : "C:\\Windows\\System32\\" + draw.pick(kTools);
          const Instance child = sim.start_attack_process(s.t, image, "\"" + image + "\" /c " + draw.hex(4));
          all_test.push_back({s.t, sim.creation(s.t, child, parent), true});
          break;
        }
        case Step::kActivity:
          all_test.push_back({s.t, attack_activity(sim, draw, s.t, *plan), true});
          break;
        case Step::kSweep: {
          const Instance& actor = sim.svchost();
          const std::string ip = plan->sweep_subnet + "." + std::to_string(1 + (sweep_host++ % 254));
          all_test.push_back({s.t, sim.flow(s.t, actor, ip, std::nullopt, "1", "outbound", Span::kSmall), true});
          break;
        }
        case Step::kWindowEnd:
          if (plan->sweeps > 0)
            out.truth.net_rules.push_back({host, plan->sweep_subnet + ".", std::nullopt,
                                           plan->window.start_ms, plan->window.end_ms});
          sim.end_attack();
          break;
      }
    }
    summary.test_malicious = malicious;
    out.hosts.push_back(summary);
  }

  // Hosts are interleaved by time, as in an aggregated capture.
  auto by_time = [](const Record& a, const Record& b) { return a.t < b.t; };
  std::stable_sort(all_train.begin(), all_train.end(), by_time);
  std::stable_sort(all_test.begin(), all_test.end(), by_time);
  out.train_lines.reserve(all_train.size());
  for (auto& r : all_train) out.train_lines.push_back(std::move(r.line));
  out.test_lines.reserve(all_test.size());
  out.test_malicious.reserve(all_test.size());
  for (auto& r : all_test) {
    out.test_lines.push_back(std::move(r.line));
    out.test_malicious.push_back(r.malicious);
  }
  return out;
}

namespace {

void write_lines(const std::vector<std::string>& lines, const std::string& path, bool gzip) {
  if (gzip) {
    gzFile gz = gzopen(path.c_str(), "wb6");
    if (!gz) throw Error("cannot write " + path);
    for (const auto& l : lines) {
      if (gzwrite(gz, l.data(), static_cast<unsigned>(l.size())) != static_cast<int>(l.size()) ||
          gzputc(gz, '\n') != '\n') {
        gzclose(gz);
        throw Error("write failed for " + path);
      }
    }
    if (gzclose(gz) != Z_OK) throw Error("write failed for " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error("write failed for " + path);
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

}  // namespace

SynthPaths write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir, bool gzip) {
  std::filesystem::create_directories(out_dir);
  const std::string ext = gzip ? ".ndjson.gz" : ".ndjson";
  const std::filesystem::path dir(out_dir);
  SynthPaths paths{(dir / ("train" + ext)).string(), (dir / ("test" + ext)).string(),
                   (dir / "truth.csv").string(), (dir / "summary.txt").string()};
  write_lines(corpus.train_lines, paths.train, gzip);
  write_lines(corpus.test_lines, paths.test, gzip);
  write_text(corpus.truth.to_csv(), paths.truth);
  write_text(corpus.summary_text(), paths.summary);
  return paths;
}

}  // namespace logae
