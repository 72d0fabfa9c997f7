//! Synthetic syslog corpus built from hand-written ground-truth templates.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
pub use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Ground truth with the value pool used for each wildcard, left to right.
pub const TEMPLATES: [(&str, &[&str]); 20] = [
    ("sshd[<*>]: Accepted password for <*> from <*> port <*> ssh2", &["pid", "user", "ip", "port"]),
    ("sshd[<*>]: Accepted publickey for <*> from <*> port <*> ssh2", &["pid", "user", "ip", "port"]),
    ("sshd[<*>]: Failed password for invalid user <*> from <*> port <*> ssh2", &["pid", "user", "ip", "port"]),
    ("sshd[<*>]: Failed password for root from <*> port <*> ssh2", &["pid", "ip", "port"]),
    ("sshd[<*>]: Connection closed by <*> port <*> [preauth]", &["pid", "ip", "port"]),
    ("sshd[<*>]: Received disconnect from <*> port <*>:11: disconnected by user", &["pid", "ip", "port"]),
    ("sshd[<*>]: pam_unix(sshd:session): session opened for user <*> by (uid=0)", &["pid", "user"]),
    ("sshd[<*>]: pam_unix(sshd:session): session closed for user <*>", &["pid", "user"]),
    ("sudo: <*> : TTY=pts/<*> ; PWD=<*> ; USER=root ; COMMAND=<*>", &["user", "num", "path", "cmd"]),
    ("sudo: pam_unix(sudo:session): session opened for user root by <*>(uid=0)", &["user"]),
    ("CRON[<*>]: (root) CMD (<*>)", &["pid", "cmd"]),
    ("CRON[<*>]: pam_unix(cron:session): session closed for user root", &["pid"]),
    ("snmpd[<*>]: Connection from UDP: [<*>]:<*>-><*>", &["pid", "ip", "port", "ip"]),
    ("snmpd[<*>]: Received SNMP packet(s) from UDP: [<*>]:<*>", &["pid", "ip", "port"]),
    ("kernel: [<*>] IN=<*> OUT= MAC=<*> SRC=<*> DST=<*> PROTO=<*>", &["uptime", "iface", "mac", "ip", "ip", "proto"]),
    ("kernel: [<*>] device <*> entered promiscuous mode", &["uptime", "iface"]),
    (
        "suricata[<*>]: [<*>:<*>:<*>] <*> [Classification: <*>] [Priority: <*>] {<*>} <*>:<*> -> <*>:<*>",
        &["pid", "num", "sid", "num", "sig", "class", "num", "proto", "ip", "port", "ip", "port"],
    ),
    ("dhclient[<*>]: DHCPACK of <*> from <*>", &["pid", "ip", "ip"]),
    ("dhclient[<*>]: DHCPREQUEST of <*> on <*> to <*> port <*>", &["pid", "ip", "iface", "ip", "port"]),
    ("systemd[<*>]: Started Session <*> of user <*>.", &["pid", "num", "user"]),
];

const USERS: &[&str] = &[
    "alice", "bob", "carol", "dave", "eve", "mallory", "oscar", "trent",
];
const PATHS: &[&str] = &["/home/alice", "/root", "/var/log", "/tmp", "/srv/www"];
const CMDS: &[&str] = &[
    "/usr/bin/apt update",
    "/bin/systemctl restart nginx",
    "/usr/bin/tail -f /var/log/syslog",
    "/usr/lib/php/sessionclean",
    "test -x /usr/sbin/anacron",
];
const IFACES: &[&str] = &["eth0", "eth1", "wlan0", "ens33"];
const PROTOS: &[&str] = &["TCP", "UDP", "ICMP"];
const SIGS: &[&str] = &[
    "ET SCAN Nmap Scripting Engine User-Agent Detected",
    "GPL ATTACK_RESPONSE id check returned root",
    "ET POLICY Outgoing Basic Auth Base64 HTTP Password detected unencrypted",
    "SURICATA STREAM ESTABLISHED packet out of window",
];
const CLASSES: &[&str] = &[
    "Web Application Attack",
    "Potentially Bad Traffic",
    "Attempted Information Leak",
    "Generic Protocol Command Decode",
];

fn value(kind: &str, rng: &mut ChaCha8Rng) -> String {
    let pick = |pool: &[&str], rng: &mut ChaCha8Rng| pool.choose(rng).unwrap().to_string();
    match kind {
        "pid" => rng.gen_range(100..65_000).to_string(),
        "num" => rng.gen_range(0..200).to_string(),
        "sid" => rng.gen_range(2_000_000..2_100_000).to_string(),
        "port" => rng.gen_range(1024..65_535).to_string(),
        "ip" => format!(
            "{}.{}.{}.{}",
            rng.gen_range(1..255),
            rng.gen_range(0..255),
            rng.gen_range(0..255),
            rng.gen_range(1..255)
        ),
        "uptime" => format!(
            "{:>5}.{:06}",
            rng.gen_range(0..99_999),
            rng.gen_range(0..1_000_000)
        ),
        "mac" => (0..6)
            .map(|_| format!("{:02x}", rng.gen::<u8>()))
            .collect::<Vec<_>>()
            .join(":"),
        "user" => pick(USERS, rng),
        "path" => pick(PATHS, rng),
        "cmd" => pick(CMDS, rng),
        "iface" => pick(IFACES, rng),
        "proto" => pick(PROTOS, rng),
        "sig" => pick(SIGS, rng),
        "class" => pick(CLASSES, rng),
        other => panic!("unknown pool {other}"),
    }
}

/// A generated log plus the set of values each (template, slot) received.
pub struct Corpus {
    pub lines: Vec<String>,
    pub slot_values: BTreeMap<(usize, usize), BTreeSet<String>>,
}

/// Instantiates template `ti`, returning the message and the chosen values.
pub fn instantiate(ti: usize, rng: &mut ChaCha8Rng) -> (String, Vec<String>) {
    let (text, pools) = TEMPLATES[ti];
    let parts: Vec<&str> = text.split("<*>").collect();
    assert_eq!(parts.len(), pools.len() + 1, "pool count for {text}");
    let mut msg = String::from(parts[0]);
    let mut values = Vec::with_capacity(pools.len());
    for (pool, lit) in pools.iter().zip(&parts[1..]) {
        let v = value(pool, rng);
        msg.push_str(&v);
        msg.push_str(lit);
        values.push(v);
    }
    (msg, values)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` syslog lines, each instantiating a uniformly chosen template.
pub fn corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = rng(seed);
    let mut lines = Vec::with_capacity(n);
    let mut slot_values: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
    for i in 0..n {
        let ti = rng.gen_range(0..TEMPLATES.len());
        let (msg, values) = instantiate(ti, &mut rng);
        for (slot, v) in values.into_iter().enumerate() {
            slot_values.entry((ti, slot)).or_default().insert(v);
        }
        let (mm, ss) = (i / 60 % 60, i % 60);
        lines.push(format!("Oct 16 10:{mm:02}:{ss:02} gw01 {msg}"));
    }
    Corpus { lines, slot_values }
}

pub fn ground_truth_text() -> String {
    TEMPLATES.iter().map(|(t, _)| format!("{t}\n")).collect()
}
