mod common;

use futures::{SinkExt, StreamExt};
use labelbench_core::time::Level;
use labelbench_server::{Envelope, Kind, Session, View, ViewQuery};
use tokio_tungstenite::tungstenite::Message;

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn websocket_carries_the_same_envelopes() {
    let session = Session::in_memory(common::build(30, "none"));
    let addr = common::serve(session).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/")).await.unwrap();

    let mut q = ViewQuery::new(View::Timeline);
    q.level = Level::Year;
    let env = Envelope::new("w1", Kind::Query, &q);
    ws.send(Message::text(serde_json::to_string(&env).unwrap())).await.unwrap();
    let reply = loop {
        match ws.next().await.unwrap().unwrap() {
            Message::Text(t) => break serde_json::from_str::<Envelope>(&t).unwrap(),
            _ => continue,
        }
    };
    assert_eq!(reply.id, "w1");
    assert_eq!(reply.kind, Kind::Result);
    assert_eq!(reply.payload["view"], "timeline");
    assert_eq!(reply.payload["accounts"].as_array().unwrap().len(), 30);
}
