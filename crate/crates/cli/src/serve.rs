use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use comanip_core::session::{ServerMsg, Session, SessionParams};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};
use tokio::time::{interval, Instant, MissedTickBehavior};

use crate::commands::{config_error, load_config};

pub struct ServeOptions {
    pub host: String,
    pub port: u16,
    pub config: Option<PathBuf>,
    pub time_scale: f64,
    pub broadcast_hz: f64,
    pub countdown: f64,
    pub export_dir: Option<PathBuf>,
}

enum Inbound {
    Connect(u64, mpsc::UnboundedSender<String>),
    Text(u64, String),
    Disconnect(u64),
}

#[derive(Clone)]
struct AppState {
    inbound: mpsc::UnboundedSender<Inbound>,
    next_id: Arc<AtomicU64>,
    shutdown: watch::Receiver<bool>,
}

pub fn run(opts: ServeOptions) -> Result<ExitCode> {
    let cfg = load_config(opts.config.as_deref())?;
    if !(opts.time_scale > 0.0 && opts.time_scale.is_finite()) {
        return Err(config_error("--time-scale must be positive"));
    }
    let params = SessionParams {
        countdown: opts.countdown,
        broadcast_hz: opts.broadcast_hz,
    };
    let session = Session::new(cfg, params).map_err(config_error)?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(serve(session, opts))?;
    Ok(ExitCode::SUCCESS)
}

async fn serve(session: Session, opts: ServeOptions) -> Result<()> {
    let listener = TcpListener::bind((opts.host.as_str(), opts.port))
        .await
        .with_context(|| format!("binding {}:{}", opts.host, opts.port))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;

    let (inbound_tx, inbound_rx) = mpsc::unbounded_channel();
    let (shutdown_tx, shutdown_rx) = watch::channel(false);
    let owner = tokio::spawn(session_loop(
        session,
        inbound_rx,
        shutdown_rx.clone(),
        opts.time_scale,
        opts.export_dir.clone(),
    ));
    let state = AppState {
        inbound: inbound_tx,
        next_id: Arc::new(AtomicU64::new(0)),
        shutdown: shutdown_rx,
    };
    let app = Router::new().route("/ws", get(upgrade)).with_state(state);
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown_signal().await;
            log::info!("shutting down");
            let _ = shutdown_tx.send(true);
        })
        .await?;
    owner.await?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(socket: WebSocket, state: AppState) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();
    if state.inbound.send(Inbound::Connect(id, out_tx)).is_err() {
        return;
    }
    let (mut sink, mut stream) = socket.split();
    let mut shutdown = state.shutdown.clone();
    loop {
        tokio::select! {
            Some(text) = out_rx.recv() => {
                if sink.send(Message::Text(text.into())).await.is_err() {
                    break;
                }
            }
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(t))) => {
                    if state.inbound.send(Inbound::Text(id, t.to_string())).is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let _ = state.inbound.send(Inbound::Text(id, String::new()));
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => {}
            },
            _ = shutdown.changed() => {
                let _ = sink.send(Message::Close(None)).await;
                break;
            }
        }
    }
    let _ = state.inbound.send(Inbound::Disconnect(id));
}

fn encode(msg: &ServerMsg) -> String {
    serde_json::to_string(msg).expect("server messages serialize")
}

/// Sole owner of the session: applies inbound messages between physics steps
/// and paces stepping against the wall clock.
async fn session_loop(
    mut session: Session,
    mut inbound: mpsc::UnboundedReceiver<Inbound>,
    mut shutdown: watch::Receiver<bool>,
    time_scale: f64,
    export_dir: Option<PathBuf>,
) {
    let dt = session.config().sim.dt;
    let mut clients: HashMap<u64, mpsc::UnboundedSender<String>> = HashMap::new();
    let mut physics = interval(Duration::from_millis(2));
    physics.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let mut broadcast = interval(Duration::from_secs_f64(1.0 / session.params().broadcast_hz));
    broadcast.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let epoch = Instant::now();
    let mut steps: u64 = 0;
    let mut exported = 0usize;

    let send_all = |clients: &HashMap<u64, mpsc::UnboundedSender<String>>, text: &str| {
        for tx in clients.values() {
            let _ = tx.send(text.to_owned());
        }
    };

    loop {
        tokio::select! {
            msg = inbound.recv() => match msg {
                Some(Inbound::Connect(id, tx)) => {
                    let _ = tx.send(encode(&session.snapshot()));
                    clients.insert(id, tx);
                }
                Some(Inbound::Text(id, text)) => {
                    for out in session.handle_text(&text) {
                        match out {
                            ServerMsg::Error { .. } => {
                                if let Some(tx) = clients.get(&id) {
                                    let _ = tx.send(encode(&out));
                                }
                            }
                            other => send_all(&clients, &encode(&other)),
                        }
                    }
                }
                Some(Inbound::Disconnect(id)) => {
                    clients.remove(&id);
                    if clients.is_empty() {
                        session.disconnect();
                    }
                }
                None => break,
            },
            _ = physics.tick() => {
                let due = (epoch.elapsed().as_secs_f64() * time_scale / dt) as u64;
                while steps < due {
                    steps += 1;
                    match session.tick() {
                        Ok(events) => {
                            for ev in events {
                                if let (ServerMsg::SetComplete { .. }, Some(dir)) = (&ev, &export_dir) {
                                    let target = dir.join(format!("session_{exported:03}"));
                                    exported += 1;
                                    match session.export(&target) {
                                        Ok(()) => log::info!("exported set to {}", target.display()),
                                        Err(e) => log::error!("export to {} failed: {e}", target.display()),
                                    }
                                }
                                send_all(&clients, &encode(&ev));
                            }
                        }
                        Err(e) => {
                            log::error!("simulation fault: {e}");
                            send_all(&clients, &encode(&ServerMsg::Error { detail: e.to_string() }));
                            session.handle_message(comanip_core::session::ClientMsg::Abort);
                        }
                    }
                }
            }
            _ = broadcast.tick() => {
                if !clients.is_empty() {
                    send_all(&clients, &encode(&session.snapshot()));
                }
            }
            _ = shutdown.changed() => break,
        }
    }
}
