use std::fs;
use std::path::Path;

use marnet_core::network::checkpoint;
use marnet_core::{Dataset, Network};

use crate::{CliError, CliResult};

pub fn save_checkpoint(net: &Network, path: &Path) -> CliResult<()> {
    fs::write(path, checkpoint::render(net)).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> CliResult<Network> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(checkpoint::parse(&text)?)
}

pub fn write_dataset(data: &Dataset, path: &Path) -> CliResult<()> {
    fs::write(path, data.to_csv()).map_err(|e| CliError::io(path, e))
}

pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(Dataset::from_csv(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use marnet_core::{ActivationKind, Error};

    #[test]
    fn checkpoint_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = Network::init(&[5, 7, 3], ActivationKind::Relu, 42).unwrap();
        save_checkpoint(&net, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), net);
    }

    #[test]
    fn truncated_checkpoint_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = Network::init(&[2, 2, 1], ActivationKind::Tanh, 1).unwrap();
        let text = checkpoint::render(&net);
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        fs::write(&path, cut).unwrap();
        match load_checkpoint(&path) {
            Err(CliError::Core(Error::Format { line, .. })) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_dataset(Path::new("/nonexistent/data.csv")).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }
}
