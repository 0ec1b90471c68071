mod common;

use std::time::Duration;

use common::{completion, endpoint, fast_config, Behaviour};
use serde_json::json;
use tagify_core::translate::TranslateError;
use tagify_core::{
    ChatExchange, ChatProvider, DatasetSample, DeeplTranslator, LanguagePair, ModelAllowlist,
    OpenAiCompatible, ProviderError, Translator,
};

fn exchange() -> ChatExchange {
    let sample =
        DatasetSample::from_rows(vec![vec!["population".into(), "year".into()]], "t").unwrap();
    ChatExchange::new(&sample, 5)
}

fn gpt4() -> tagify_core::ModelId {
    ModelAllowlist::default().resolve("gpt-4").unwrap()
}

#[tokio::test]
async fn completion_wire_format() {
    let (addr, rec) = endpoint("/chat/completions", Behaviour::Reply(completion("a,b,c"))).await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    let ex = exchange();
    assert_eq!(provider.complete(&ex, &gpt4()).await.unwrap(), "a,b,c");

    let body = rec.bodies.lock().unwrap()[0].clone();
    assert_eq!(body["model"], "gpt-4");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(
        body["messages"],
        json!([
            {"role": "system", "content": ex.system_message},
            {"role": "user", "content": "population,year\n"},
        ])
    );
    assert_eq!(rec.auth.lock().unwrap()[0], "Bearer test-key");
}

#[tokio::test]
async fn base_url_path_prefix_is_kept() {
    let (addr, rec) = endpoint("/v1/chat/completions", Behaviour::Reply(completion("x"))).await;
    let mut cfg = fast_config(addr);
    cfg.base_url = cfg.base_url.join("v1").unwrap();
    let provider = OpenAiCompatible::new(cfg).unwrap();
    assert_eq!(provider.complete(&exchange(), &gpt4()).await.unwrap(), "x");
    assert_eq!(rec.calls(), 1);
}

#[tokio::test]
async fn unauthorized_is_rejected_without_retry() {
    let (addr, rec) = endpoint(
        "/chat/completions",
        Behaviour::Status(401, "invalid api key"),
    )
    .await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    let err = provider.complete(&exchange(), &gpt4()).await.unwrap_err();
    assert_eq!(
        err,
        ProviderError::Rejected {
            status: 401,
            body: "invalid api key".into()
        }
    );
    assert_eq!(rec.calls(), 1);
}

#[tokio::test]
async fn context_overflow_body_is_attached() {
    let upstream = r#"{"error":{"code":"context_length_exceeded"}}"#;
    let (addr, _) = endpoint("/chat/completions", Behaviour::Status(400, upstream)).await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    match provider.complete(&exchange(), &gpt4()).await {
        Err(ProviderError::Rejected { status: 400, body }) => {
            assert!(body.contains("context_length_exceeded"))
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[tokio::test]
async fn server_errors_retried_then_unavailable() {
    let (addr, rec) = endpoint("/chat/completions", Behaviour::Status(503, "overloaded")).await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    let err = provider.complete(&exchange(), &gpt4()).await.unwrap_err();
    assert!(matches!(err, ProviderError::Unavailable(_)), "{err:?}");
    assert_eq!(rec.calls(), 3, "one attempt plus two retries");
}

#[tokio::test]
async fn empty_choices_is_empty_completion() {
    let (addr, _) = endpoint(
        "/chat/completions",
        Behaviour::Reply(json!({"choices": []})),
    )
    .await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    assert_eq!(
        provider.complete(&exchange(), &gpt4()).await,
        Err(ProviderError::EmptyCompletion)
    );

    let (addr, _) = endpoint("/chat/completions", Behaviour::Reply(completion(""))).await;
    let provider = OpenAiCompatible::new(fast_config(addr)).unwrap();
    assert_eq!(
        provider.complete(&exchange(), &gpt4()).await,
        Err(ProviderError::EmptyCompletion)
    );
}

#[tokio::test]
async fn slow_server_times_out() {
    let (addr, rec) = endpoint(
        "/chat/completions",
        Behaviour::Sleep(Duration::from_secs(3)),
    )
    .await;
    let mut cfg = fast_config(addr);
    cfg.timeout = Duration::from_millis(100);
    cfg.max_retries = 1;
    let provider = OpenAiCompatible::new(cfg).unwrap();
    let err = provider.complete(&exchange(), &gpt4()).await.unwrap_err();
    assert_eq!(err, ProviderError::Timeout(Duration::from_millis(100)));
    assert_eq!(rec.calls(), 2);
}

#[tokio::test]
async fn unreachable_host_is_unavailable() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let mut cfg = fast_config(addr);
    cfg.max_retries = 0;
    let provider = OpenAiCompatible::new(cfg).unwrap();
    assert!(matches!(
        provider.complete(&exchange(), &gpt4()).await,
        Err(ProviderError::Unavailable(_))
    ));
}

#[tokio::test]
async fn deepl_wire_format_and_alignment() {
    let (addr, rec) = common::case_flipping_translator().await;
    let translator = DeeplTranslator::new(fast_config(addr)).unwrap();
    let tags: Vec<String> = ["Health", "public transport", "GDP"]
        .map(String::from)
        .to_vec();
    let out = translator
        .translate_all(&tags, LanguagePair::default())
        .await
        .unwrap();
    assert_eq!(out, ["hEALTH", "PUBLIC TRANSPORT", "gdp"]);
    let body = rec.bodies.lock().unwrap()[0].clone();
    assert_eq!(body["source_lang"], "EN");
    assert_eq!(body["target_lang"], "ET");
    assert_eq!(body["text"], json!(tags));
    assert_eq!(rec.calls(), 1, "one batched request");
}

#[tokio::test]
async fn deepl_auth_header() {
    let (addr, rec) = endpoint(
        "/v2/translate",
        Behaviour::Reply(json!({"translations": [{"text": "tervis"}]})),
    )
    .await;
    let translator = DeeplTranslator::new(fast_config(addr)).unwrap();
    let out = translator
        .translate_all(&["health".into()], LanguagePair::default())
        .await
        .unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(rec.auth.lock().unwrap()[0], "DeepL-Auth-Key test-key");
}

#[tokio::test]
async fn deepl_length_mismatch() {
    let (addr, _) = endpoint(
        "/v2/translate",
        Behaviour::Reply(json!({"translations": [{"text": "üks"}]})),
    )
    .await;
    let translator = DeeplTranslator::new(fast_config(addr)).unwrap();
    let err = translator
        .translate_all(&["one".into(), "two".into()], LanguagePair::default())
        .await
        .unwrap_err();
    assert_eq!(
        err,
        TranslateError::Provider(ProviderError::LengthMismatch {
            expected: 2,
            got: 1
        })
    );
}

#[tokio::test]
async fn deepl_forbidden_is_rejected() {
    let (addr, _) = endpoint("/v2/translate", Behaviour::Status(403, "Forbidden")).await;
    let translator = DeeplTranslator::new(fast_config(addr)).unwrap();
    let err = translator
        .translate_all(&["x".into()], LanguagePair::default())
        .await
        .unwrap_err();
    assert!(matches!(
        err,
        TranslateError::Provider(ProviderError::Rejected { status: 403, .. })
    ));
}

#[tokio::test]
async fn deepl_empty_input_makes_no_call() {
    let (addr, rec) = common::case_flipping_translator().await;
    let translator = DeeplTranslator::new(fast_config(addr)).unwrap();
    assert_eq!(
        translator.translate_all(&[], LanguagePair::default()).await,
        Err(TranslateError::EmptyInput)
    );
    assert_eq!(rec.calls(), 0);
}
