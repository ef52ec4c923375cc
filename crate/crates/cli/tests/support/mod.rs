#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_in(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cubic-mf")).args(args).current_dir(dir).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn run(args: &[&str]) -> Run {
    run_in(Path::new("."), args)
}

/// Header, data rows and `# key = value` metadata of one CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub meta: Vec<(String, String)>,
}

impl Csv {
    pub fn parse(text: &str) -> Csv {
        let mut lines = text.lines();
        let header = lines.next().expect("header").split(',').map(String::from).collect();
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for line in lines {
            if let Some(m) = line.strip_prefix("# ") {
                let (k, v) = m.split_once(" = ").expect("metadata line");
                meta.push((k.to_string(), v.to_string()));
            } else if !line.is_empty() {
                rows.push(line.split(',').map(String::from).collect());
            }
        }
        Csv { header, rows, meta }
    }

    pub fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    pub fn f(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        (0..self.rows.len()).map(|i| self.f(i, name)).collect()
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// The metadata as command-line flags.
    pub fn meta_flags(&self) -> Vec<String> {
        self.meta
            .iter()
            .filter(|(k, v)| !["tool", "command", "generator"].contains(&k.as_str()) && !(k == "seed" && v == "none"))
            .flat_map(|(k, v)| [format!("--{k}"), v.clone()])
            .collect()
    }
}

/// Tables printed to standard output are separated by an empty line.
pub fn tables(stdout: &str) -> Vec<Csv> {
    stdout.split("\n\n").filter(|t| !t.trim().is_empty()).map(Csv::parse).collect()
}
