use hillgap::parse::{parse_config, Config};

use crate::commands::Failure;

/// Config-file values for one subcommand; flags win over the file.
#[derive(Debug, Default)]
pub struct Settings {
    config: Option<Config>,
    section: &'static str,
}

impl Settings {
    pub fn load(path: Option<&str>, section: &'static str) -> Result<Self, Failure> {
        let config = match path {
            None => None,
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("cannot read config {p}: {e}")))?;
                Some(parse_config(&text).map_err(|e| Failure::usage(format!("{p}: {e}")))?)
            }
        };
        Ok(Self { config, section })
    }

    pub fn pick(&self, flag: Option<&str>, key: &str) -> Option<String> {
        flag.map(str::to_string)
            .or_else(|| self.config.as_ref()?.get(self.section, key).map(str::to_string))
    }
}
