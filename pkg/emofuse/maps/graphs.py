from pipelines.graphs import AudioFFN, AudioGRU, EarlyFusion, VisualGRU

# Маппинг kind из конфигурации на класс графа
GRAPH_CLASSES = {
    "audio_ffn": AudioFFN,
    "audio_gru": AudioGRU,
    "visual_gru": VisualGRU,
    "early_fusion": EarlyFusion,
}
