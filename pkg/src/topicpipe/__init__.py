"""Topic extraction pipeline: embeddings, kernel PCA, k-means, class-based
TF-IDF, with LDA/LSI baselines and coherence evaluation."""

from .baselines import (
    LdaModel,
    LsiModel,
    lda_fit,
    lda_topics,
    load_lda,
    load_lsi,
    lsi_fit,
    lsi_topics,
    save_lda,
    save_lsi,
)
from .cluster import (
    NOISE,
    CentroidSet,
    ClusterAssignment,
    agglomerative,
    dbscan,
    kmeans,
    kmeanspp_init,
    ward_merge_sequence,
)
from .coherence import (
    WHOLE_DOC,
    CoherenceReport,
    CooccurrenceStats,
    cooccurrence_stats,
    cv,
    umass,
)
from .corpus import (
    Corpus,
    CountMatrix,
    Document,
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    doc_term_counts,
    load_stopwords,
    tfidf,
    tokenize,
)
from .dimred import (
    EigenResult,
    KernelConfig,
    KernelPcaModel,
    ReducedMatrix,
    center_kernel,
    compute_kernel,
    kpca_fit,
    kpca_fit_transform,
    pca_fit_transform,
    sym_eigs_topk,
    truncated_svd,
)
from .embeddings import (
    EmbeddingMatrix,
    hash_projection_embed,
    read_embeddings,
    write_embeddings,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateTopic,
    EmptyClass,
    EmptyVocabulary,
    FormatError,
    RankError,
    StageError,
    TopicPipeError,
)
from .pipeline import (
    PipelineConfig,
    RunReport,
    grid_run,
    load_config,
    load_grid_configs,
    run_pipeline,
    topic_sweep,
)
from .topics import Topic, TopicSet, class_tfidf, top_terms

__version__ = "0.1.0"
