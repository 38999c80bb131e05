"""Concept synonym tables for node-name matching.

File format: one concept per line, ``concept: term1, term2, ...``; ``#`` starts
a comment. Terms are normalized with the same tokenizer used for node names,
so ``PostgreSQL`` and ``postgresql`` are the same term.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

DEFAULT_SYNONYMS = """\
# storage
database: database, db, mysql, postgres, postgresql, mongodb, mongo, sqlite, rds, mariadb, oracle, sql server, relational database, rdbms, data store
cache: cache, redis, memcached, memcache, in memory cache
queue: queue, message queue, mq, rabbitmq, kafka, activemq, rocketmq, sqs, message broker, broker, event bus
object_storage: object storage, s3, minio, oss, blob storage, file storage, file store
search: search engine, elasticsearch, opensearch, solr, lucene, full text search
vector_store: vector database, vector store, faiss, milvus, pinecone, chroma, chromadb, weaviate, qdrant
graph_db: graph database, neo4j, janusgraph
time_series: time series database, influxdb, prometheus tsdb, timescaledb
# serving and edge
gateway: api gateway, gateway, kong, zuul, spring cloud gateway
load_balancer: load balancer, nginx, haproxy, elb, reverse proxy
cdn: cdn, content delivery network, cloudfront
web_server: web server, tomcat, apache, jetty, gunicorn, uvicorn
# ui
frontend: frontend, front end, web frontend, web ui, web client, ui, user interface, browser, spa, vue, react, angular
mobile: mobile app, mobile client, android app, ios app, app client, mini program, wechat mini program
admin_ui: admin panel, admin console, management console, admin dashboard, back office
# identity
auth: authentication, auth, authentication service, auth service, login service, identity service, sso, oauth, keycloak
authorization: authorization, access control, permission service, rbac, acl
user: user management, user service, account service, user center, user module
# messaging and notification
notification: notification service, notifier, push service, notification, alerting service
email: email service, mail service, smtp, mailer, email
sms: sms service, sms gateway, text message service
# ops
logging: logging, logger, log service, log aggregator, logstash, fluentd, elk, loki
monitoring: monitoring, metrics, prometheus, grafana, observability, apm
config: configuration center, config center, config server, nacos, apollo, consul config
registry: service registry, service discovery, eureka, consul, zookeeper, etcd
scheduler: scheduler, job scheduler, cron, task scheduler, quartz, celery beat
worker: task queue worker, background worker, celery, worker, job runner, async worker
container: container orchestration, kubernetes, k8s, docker swarm
ci_cd: ci cd, continuous integration, jenkins, github actions, gitlab ci
# ai
llm: llm, large language model, language model, gpt, openai api, chatgpt, llm api, llm service
model_serving: model serving, inference service, model server, triton, torchserve, inference engine
embedding: embedding service, embedding model, text embedding, encoder service
# commerce and misc
payment: payment service, payment gateway, payment, alipay, stripe, wechat pay, paypal
order: order service, order management, order module
analytics: analytics, data analytics, reporting service, bi, report service, statistics service
file_upload: file upload service, upload service, file service, attachment service
recommendation: recommendation engine, recommender, recommendation service, recommendation module
map: map service, maps api, geolocation service, gis, location service
websocket: websocket, websocket server, realtime channel, socket io
rest_api: rest api, backend api, api server, backend, backend service, web api, api service
"""

# Filler words that do not change which concept a name refers to.
GENERIC_WORDS = frozenset(
    {"server", "service", "services", "instance", "cluster", "engine", "system", "module",
     "db", "database", "store", "storage", "layer", "component", "client", "api"}
)


def parse_synonyms(text: str, tokenize) -> dict[tuple[str, ...], str]:
    table: dict[tuple[str, ...], str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"synonym line {lineno}: expected 'concept: term, ...'")
        concept, terms = line.split(":", 1)
        concept = concept.strip()
        for term in [concept.replace("_", " "), *terms.split(",")]:
            tokens = tuple(tokenize(term))
            if tokens:
                table.setdefault(tokens, concept)
    return table


class SynonymTable:
    """Maps token sequences to canonical concepts."""

    def __init__(self, table: Mapping[tuple[str, ...], str]):
        self._table = dict(table)

    @classmethod
    def from_text(cls, text: str) -> SynonymTable:
        from .alignment import normalize_label

        return cls(parse_synonyms(text, normalize_label))

    @classmethod
    def default(cls) -> SynonymTable:
        return _default()

    @classmethod
    def load(cls, path: str | Path, include_defaults: bool = True) -> SynonymTable:
        text = Path(path).read_text(encoding="utf-8")
        if include_defaults:
            text = DEFAULT_SYNONYMS + "\n" + text
        table = cls.from_text(text)
        return table

    def merged(self, extra: Iterable[tuple[tuple[str, ...], str]]) -> SynonymTable:
        table = dict(self._table)
        table.update(extra)
        return SynonymTable(table)

    def __len__(self) -> int:
        return len(self._table)

    def concepts(self) -> set[str]:
        return set(self._table.values())

    def concept_of(self, tokens: Iterable[str]) -> str | None:
        """Concept for a whole name, or None.

        The full token sequence is looked up first. Otherwise every token must
        either map to one shared concept or be a generic filler word, and at
        least one token must map. ``"User DB"`` therefore has no concept, while
        ``"MySQL Database"`` and ``"Redis Cache"`` do.
        """
        tokens = tuple(tokens)
        if not tokens:
            return None
        if tokens in self._table:
            return self._table[tokens]
        found: set[str] = set()
        for tok in tokens:
            concept = self._table.get((tok,))
            if concept is not None and not (tok in GENERIC_WORDS and len(tokens) > 1):
                found.add(concept)
            elif tok not in GENERIC_WORDS:
                return None
        return found.pop() if len(found) == 1 else None


_DEFAULT: SynonymTable | None = None


def _default() -> SynonymTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = SynonymTable.from_text(DEFAULT_SYNONYMS)
    return _DEFAULT
